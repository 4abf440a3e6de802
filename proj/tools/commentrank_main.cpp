#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commentrank/csv.hpp"
#include "commentrank/forum.hpp"
#include "commentrank/gapstats.hpp"
#include "commentrank/ingest.hpp"
#include "commentrank/model.hpp"
#include "commentrank/policy.hpp"
#include "commentrank/synth.hpp"
#include "commentrank/textfeat.hpp"

namespace fs = std::filesystem;
using namespace commentrank;

namespace {

void print_summary(const LoadResult& result) {
  std::printf("discussions: %zu\n", result.summary.discussions);
  std::printf("comments:    %zu\n", result.summary.comments);
  std::printf("root share:  %.1f%%\n", 100.0 * result.summary.root_share());
  std::printf("pinned:      %zu (%.2f%%)\n", result.summary.pinned,
              100.0 * result.summary.pinned_share());
  for (const std::string& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t lo = 0;
  while (lo <= s.size()) {
    const std::size_t hi = s.find(',', lo);
    out.push_back(s.substr(lo, hi == std::string::npos ? hi : hi - lo));
    if (hi == std::string::npos) break;
    lo = hi + 1;
  }
  return out;
}

std::vector<PolicyDescriptor> resolve_policies(const std::string& expr,
                                               const std::vector<std::string>& external) {
  if (expr == "all") return enumerate_policies(external);
  std::vector<PolicyDescriptor> out;
  for (const std::string& part : split_list(expr)) out.push_back(parse_policy(part));
  return out;
}

std::vector<std::optional<int>> resolve_n_list(const std::string& expr) {
  std::vector<std::optional<int>> out;
  for (const std::string& part : split_list(expr)) {
    if (part == "full") {
      out.emplace_back(std::nullopt);
      continue;
    }
    int v = 0;
    try {
      v = std::stoi(part);
    } catch (const std::exception&) {
      throw Error("bad n value '" + part + "': expected a positive integer or 'full'");
    }
    if (v < 1) throw Error("n values must be >= 1 or 'full'");
    out.emplace_back(v);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Comment ranking policy evaluation for threaded discussions"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 0;

  // --- validate ---
  auto* validate = app.add_subcommand("validate", "Parse and validate a corpus");
  validate->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();

  // --- features ---
  auto* features_cmd = app.add_subcommand("features", "Compute per-comment feature scores");
  features_cmd->add_option("--manifest", manifest_path)->required();
  std::string features_out = "features.csv";
  features_cmd->add_option("--out", features_out, "Output CSV");
  std::string feature_config_path;
  features_cmd->add_option("--feature-config", feature_config_path,
                           "JSON file overriding scoring thresholds");

  // --- evaluate ---
  auto* evaluate = app.add_subcommand("evaluate", "Score ranking policies over the corpus");
  evaluate->add_option("--manifest", manifest_path)->required();
  evaluate->add_option("--out", out_dir, "Output directory");
  evaluate->add_option("--seed", seed, "Deterministic seed")->required();
  evaluate->add_option("--jobs", jobs, "Worker threads (0 = all)");
  std::string policies_expr = "all";
  evaluate->add_option("--policies", policies_expr,
                       "'all' or comma-separated policy expressions like upvotes+pinned+trees");
  std::string features_expr = "sentiment_compound,lexical_diversity,readability,topical_similarity";
  evaluate->add_option("--features", features_expr, "Comma-separated target features");
  std::string n_expr = "10,full";
  evaluate->add_option("--n", n_expr, "Comma-separated positions, e.g. 10,full");
  evaluate->add_option("--feature-config", feature_config_path,
                       "JSON file overriding scoring thresholds");

  // --- gap ---
  auto* gap = app.add_subcommand("gap", "Pinned-vs-top-voted gap statistics");
  gap->add_option("--manifest", manifest_path)->required();
  gap->add_option("--out", out_dir, "Output directory");
  gap->add_option("--seed", seed, "Deterministic seed")->required();
  std::string coeff_path;
  gap->add_option("--coefficients", coeff_path,
                  "CSV with feature,beta_pick,beta_up,beta_down");

  // --- export ---
  auto* export_cmd = app.add_subcommand("export", "Per-comment regression table");
  export_cmd->add_option("--manifest", manifest_path)->required();
  std::string export_out = "regression_table.csv";
  export_cmd->add_option("--out", export_out, "Output CSV");
  std::string forum_csv;
  export_cmd->add_option("--forum", forum_csv,
                         "Attach unit-interval scores from an evaluate run (forum_results.csv)");
  std::string attach_policy = "revchrono+pinned+trees";
  export_cmd->add_option("--attach-policy", attach_policy,
                         "Policy id to attach from --forum");
  export_cmd->add_option("--feature-config", feature_config_path,
                         "JSON file overriding scoring thresholds");

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--seed", seed, "Deterministic seed")->required();
  int n_discussions = 10;
  int mean_comments = 100;
  double root_fraction = 0.316;
  double pinned_fraction = 0.005;
  synth->add_option("--discussions", n_discussions, "Number of discussions");
  synth->add_option("--mean-comments", mean_comments, "Mean comments per discussion");
  synth->add_option("--root-fraction", root_fraction, "Share of root comments");
  synth->add_option("--pinned-fraction", pinned_fraction, "Share of pinned comments");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    try {
      const LoadResult result = load_corpus(CorpusManifest::load(manifest_path));
      print_summary(result);
      return result.warnings.empty() ? 0 : 1;
    } catch (const StructureError& e) {
      std::fprintf(stderr, "structural error: %s\n", e.what());
      return 2;
    } catch (const ParseError& e) {
      std::fprintf(stderr, "structural error: %s\n", e.what());
      return 2;
    }
  }

  const FeatureConfig feature_config = feature_config_path.empty()
                                           ? FeatureConfig{}
                                           : FeatureConfig::load(feature_config_path);

  if (features_cmd->parsed()) {
    const LoadResult result = load_corpus(CorpusManifest::load(manifest_path));
    const FeatureTable table = score_corpus(result.discussions, feature_config);
    std::ofstream out(features_out, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + features_out);
    write_csv_row(out, {"discussion_id", "comment_id", "sentiment_compound",
                        "lexical_diversity", "readability", "topical_similarity",
                        "num_punctuation", "num_sentences", "uses_second_person"});
    for (std::size_t d = 0; d < result.discussions.size(); ++d) {
      const Discussion& disc = result.discussions[d];
      for (int c = 0; c < disc.n(); ++c) {
        const FeatureScores& f = table.scores[d][c];
        write_csv_row(out, {disc.discussion_id, disc.comments[c].comment_id,
                            fmt_double(f.sentiment_compound), fmt_double(f.lexical_diversity),
                            fmt_double(f.readability.value_or(table.readability_min)),
                            fmt_double(f.topical_similarity),
                            std::to_string(f.num_punctuation), std::to_string(f.num_sentences),
                            f.uses_second_person ? "1" : "0"});
      }
    }
    std::printf("wrote %s\n", features_out.c_str());
    return 0;
  }

  if (evaluate->parsed()) {
    const CorpusManifest manifest = CorpusManifest::load(manifest_path);
    const LoadResult result = load_corpus(manifest);
    if (result.discussions.empty()) throw Error("empty corpus: nothing to evaluate");
    std::vector<PolicyDescriptor> policies;
    try {
      policies = resolve_policies(policies_expr, manifest.external_columns);
    } catch (const Error& e) {
      throw CLI::ValidationError("--policies", e.what());
    }
    const std::vector<std::string> feature_names = split_list(features_expr);
    EvalOptions options;
    options.n_list = resolve_n_list(n_expr);
    options.seed = seed;
    options.jobs = jobs;

    const FeatureTable table = score_corpus(result.discussions, feature_config);
    const std::vector<ForumResult> rows =
        evaluate_all(result.discussions, table, policies, feature_names, options);

    fs::create_directories(out_dir);
    write_forum_csv(fs::path(out_dir) / "forum_results.csv", rows);
    write_forum_summary_csv(fs::path(out_dir) / "forum_summary.csv", rows);
    std::size_t skipped = 0, clamped = 0;
    for (const ForumResult& r : rows) {
      skipped += r.skipped ? 1 : 0;
      if (!r.skipped && r.n_label != "full" && r.n < std::stoi(r.n_label)) ++clamped;
    }
    if (clamped)
      std::fprintf(stderr, "notice: %zu row(s) clamped n to N-1 on short discussions\n",
                   clamped);
    std::printf("wrote %zu rows (%zu skipped) to %s\n", rows.size(), skipped, out_dir.c_str());
    return 0;
  }

  if (gap->parsed()) {
    const LoadResult result = load_corpus(CorpusManifest::load(manifest_path));
    const GapReport report = build_gap_report(result.discussions, seed);
    fs::create_directories(out_dir);
    write_gap_per_discussion_csv(fs::path(out_dir) / "gap_per_discussion.csv", report);
    write_gap_summary_csv(fs::path(out_dir) / "gap_summary.csv", report);
    if (report.per_discussion.empty())
      std::fprintf(stderr, "notice: no discussions with pinned comments; gap report is empty\n");
    if (!coeff_path.empty()) {
      const std::vector<CoefficientRow> coeffs = read_coefficients(coeff_path);
      write_coefficient_report_csv(fs::path(out_dir) / "coefficient_report.csv", coeffs);
    }
    std::printf("wrote gap reports for %zu discussion(s) to %s\n",
                report.per_discussion.size(), out_dir.c_str());
    return 0;
  }

  if (export_cmd->parsed()) {
    const LoadResult result = load_corpus(CorpusManifest::load(manifest_path));
    const FeatureTable table = score_corpus(result.discussions, feature_config);
    std::vector<PhiAttachment> attachments;
    if (!forum_csv.empty()) {
      // One column per (feature, n) of the attached policy.
      const auto rows = read_csv(forum_csv);
      std::map<std::string, PhiAttachment> by_column;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 7 || r[1] != attach_policy || r[6] == "1") continue;
        const std::string column = "phi_unit:" + r[1] + ":" + r[2] + ":" + r[3];
        auto& a = by_column[column];
        a.column = column;
        a.by_discussion[r[0]] = std::stod(r[5]);
      }
      for (auto& [_, a] : by_column) attachments.push_back(std::move(a));
    }
    export_regression_table(result.discussions, table, export_out, {}, attachments);
    std::printf("wrote %s\n", export_out.c_str());
    return 0;
  }

  if (synth->parsed()) {
    SynthCorpusConfig config;
    config.n_discussions = n_discussions;
    config.mean_comments = mean_comments;
    config.base.seed = seed;
    config.base.root_fraction = root_fraction;
    config.base.pinned_fraction = pinned_fraction;
    const std::vector<SynthDiscussion> corpus = generate_corpus(config);

    std::vector<Discussion> discussions;
    discussions.reserve(corpus.size());
    for (const SynthDiscussion& s : corpus) discussions.push_back(s.discussion);

    fs::create_directories(out_dir);
    const fs::path articles = fs::path(out_dir) / "articles.jsonl";
    const fs::path comments = fs::path(out_dir) / "comments.jsonl";
    write_corpus(discussions, articles, comments);

    nlohmann::json manifest{{"articles", "articles.jsonl"},
                            {"comments", "comments.jsonl"},
                            {"external_columns", config.base.external_columns},
                            {"seed", seed}};
    std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << '\n';
    std::printf("wrote %d discussion(s) to %s\n", n_discussions, out_dir.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
