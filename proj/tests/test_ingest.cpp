#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "commentrank/csv.hpp"
#include "commentrank/forum.hpp"
#include "commentrank/ingest.hpp"
#include "commentrank/synth.hpp"

using namespace commentrank;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("commentrank_ingest_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

CorpusManifest manifest_for(const fs::path& dir) {
  CorpusManifest m;
  m.articles_path = dir / "articles.jsonl";
  m.comments_path = dir / "comments.jsonl";
  return m;
}

const char* kArticle =
    R"({"article_id":"a1","discussion_id":"d1","published_at":100,"genre":"politik","title":"T","body_text":"der artikel text hier"})";

std::string comment_line(const std::string& id, const std::string& parent, int ts,
                         bool pinned = false) {
  std::ostringstream os;
  os << R"({"comment_id":")" << id << R"(","discussion_id":"d1",)";
  if (!parent.empty()) os << R"("parent_id":")" << parent << R"(",)";
  os << R"("timestamp":)" << ts << R"(,"upvotes":1,"downvotes":0,"pinned":)"
     << (pinned ? "true" : "false")
     << R"(,"author_id":"u1","author_followers":2,"text":"ein text dazu mehr",)"
     << R"("precomputed":{"sentiment_pos":0.5,"sentiment_neg":0.2}})";
  return os.str();
}

}  // namespace

TEST_CASE("minimal corpus: one article, one comment") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl", comment_line("c1", "", 200) + "\n");
  const LoadResult r = load_corpus(manifest_for(dir.path));
  CHECK(r.summary.discussions == 1);
  CHECK(r.summary.comments == 1);
  CHECK(r.warnings.empty());
  CHECK(r.discussions[0].comments[0].precomputed.at("sentiment_pos") == doctest::Approx(0.5));
}

TEST_CASE("root share is reported exactly") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  std::ostringstream comments;
  // 1000 comments, 316 roots.
  for (int i = 0; i < 1000; ++i) {
    const bool root = i < 316;
    comments << comment_line("c" + std::to_string(i), root ? "" : "c0", 200 + i) << "\n";
  }
  const LoadResult r = load_corpus([&] {
    write_file(dir.path / "comments.jsonl", comments.str());
    return manifest_for(dir.path);
  }());
  CHECK(r.summary.comments == 1000);
  CHECK(r.summary.root_share() == doctest::Approx(0.316));
}

TEST_CASE("malformed line errors with its line number") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl",
             comment_line("c1", "", 200) + "\nnot json at all\n");
  CHECK_THROWS_WITH_AS(load_corpus(manifest_for(dir.path)), doctest::Contains(":2"),
                       ParseError);
}

TEST_CASE("comment for an unknown discussion is skipped with a warning") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  std::string stray = comment_line("c2", "", 300);
  stray.replace(stray.find("\"d1\""), 4, "\"dX\"");
  write_file(dir.path / "comments.jsonl", comment_line("c1", "", 200) + "\n" + stray + "\n");
  const LoadResult r = load_corpus(manifest_for(dir.path));
  CHECK(r.summary.comments == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("unknown discussion") != std::string::npos);
}

TEST_CASE("orphaned comments re-attach as roots with a warning") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl",
             comment_line("c1", "", 200) + "\n" + comment_line("c2", "ghost", 300) + "\n");
  const LoadResult r = load_corpus(manifest_for(dir.path));
  CHECK(r.summary.comments == 2);
  CHECK(r.summary.roots == 2);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("re-attached") != std::string::npos);
}

TEST_CASE("cycles remain structural errors") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl", comment_line("c1", "c1", 200) + "\n");
  CHECK_THROWS_AS(load_corpus(manifest_for(dir.path)), StructureError);
}

TEST_CASE("declared external columns must exist unless optional") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl", comment_line("c1", "", 200) + "\n");

  CorpusManifest m = manifest_for(dir.path);
  m.external_columns = {"pred_up_nbr"};
  CHECK_THROWS_AS(load_corpus(m), Error);

  m.optional_columns["pred_up_nbr"] = 0.25;
  const LoadResult r = load_corpus(m);
  CHECK(r.discussions[0].comments[0].precomputed.at("pred_up_nbr") == doctest::Approx(0.25));
}

TEST_CASE("pre-publication comments warn") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  write_file(dir.path / "comments.jsonl", comment_line("c1", "", 50) + "\n");  // before 100
  const LoadResult r = load_corpus(manifest_for(dir.path));
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("before article publication") != std::string::npos);
}

TEST_CASE("round trip preserves counts and ids exactly") {
  SynthCorpusConfig cfg;
  cfg.n_discussions = 4;
  cfg.mean_comments = 30;
  cfg.base.seed = 9;
  const auto corpus = generate_corpus(cfg);
  std::vector<Discussion> original;
  for (const auto& s : corpus) original.push_back(s.discussion);

  TempDir dir;
  write_corpus(original, dir.path / "articles.jsonl", dir.path / "comments.jsonl");
  CorpusManifest m = manifest_for(dir.path);
  const LoadResult first = load_corpus(m);

  write_corpus(first.discussions, dir.path / "articles2.jsonl", dir.path / "comments2.jsonl");
  m.articles_path = dir.path / "articles2.jsonl";
  m.comments_path = dir.path / "comments2.jsonl";
  const LoadResult second = load_corpus(m);

  REQUIRE(first.discussions.size() == second.discussions.size());
  REQUIRE(first.discussions.size() == original.size());
  for (std::size_t d = 0; d < original.size(); ++d) {
    REQUIRE(second.discussions[d].n() == original[d].n());
    for (int c = 0; c < original[d].n(); ++c)
      CHECK(second.discussions[d].comments[c].comment_id ==
            original[d].comments[c].comment_id);
  }
}

TEST_CASE("export standardises log-tailed columns") {
  // Two comments with author_followers 0 and e-1: log1p gives {0, 1},
  // sample standardisation gives +-1/sqrt(2).
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  std::string c1 = comment_line("c1", "", 200);
  std::string c2 = comment_line("c2", "", 300);
  c1.replace(c1.find("\"author_followers\":2"), 20, "\"author_followers\":0");
  // e - 1 is not an integer; author_followers is, so test via a float field:
  // hours_since_article. Timestamps 100 + 3600*(e-1) is fractional; keep the
  // integer grid instead and check monotonicity plus the exact value on a
  // direct offset_nonnegative-style column below.
  write_file(dir.path / "comments.jsonl", c1 + "\n" + c2 + "\n");
  const LoadResult r = load_corpus(manifest_for(dir.path));
  const FeatureTable table = score_corpus(r.discussions);

  CHECK_THROWS_WITH_AS(
      export_regression_table(r.discussions, table, dir.path / "t.csv"),
      doctest::Contains("zero-variance"), Error);  // constant columns exist

  // Relax: only override the constant columns to None so the export runs.
  std::map<std::string, Transform> overrides;
  for (const char* col : {"sentiment_pos", "sentiment_neg", "lexical_diversity",
                          "readability", "topical_similarity", "num_punctuation",
                          "num_sentences", "level_in_tree", "tree_size", "tree_height",
                          "num_replies", "upvotes", "downvotes",
                          "num_comments_in_discussion", "mean_upvotes_in_discussion",
                          "mean_downvotes_in_discussion"})
    overrides[col] = Transform::None;
  export_regression_table(r.discussions, table, dir.path / "t.csv", overrides);

  const auto rows = read_csv(dir.path / "t.csv");
  REQUIRE(rows.size() == 3);
  int col = -1;
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    if (rows[0][i] == "author_followers") col = static_cast<int>(i);
  REQUIRE(col >= 0);
  // followers {0, 2}: log1p {0, log3}, standardised +-1/sqrt(2).
  CHECK(std::stod(rows[1][col]) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(std::stod(rows[2][col]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("log1p then standardise: the worked two-point column") {
  // Column {0, e-1}: log1p -> {0, 1} -> standardised -> +-0.7071.
  std::vector<double> column = {0.0, std::exp(1.0) - 1.0};
  for (double& v : column) v = std::log1p(v);
  const double mean = (column[0] + column[1]) / 2.0;
  const double sd = std::sqrt(((column[0] - mean) * (column[0] - mean) +
                               (column[1] - mean) * (column[1] - mean)) /
                              1.0);
  CHECK((column[0] - mean) / sd == doctest::Approx(-0.70710678).epsilon(1e-6));
  CHECK((column[1] - mean) / sd == doctest::Approx(0.70710678).epsilon(1e-6));
}

TEST_CASE("phi attachment lands as a per-discussion constant") {
  TempDir dir;
  write_file(dir.path / "articles.jsonl", std::string(kArticle) + "\n");
  std::string c2 = comment_line("c2", "", 300);
  c2.replace(c2.find("\"author_followers\":2"), 20, "\"author_followers\":5");
  std::string c3 = comment_line("c3", "", 400);
  c3.replace(c3.find("\"author_followers\":2"), 20, "\"author_followers\":9");
  write_file(dir.path / "comments.jsonl",
             comment_line("c1", "", 200) + "\n" + c2 + "\n" + c3 + "\n");
  const LoadResult r = load_corpus(manifest_for(dir.path));
  const FeatureTable table = score_corpus(r.discussions);

  PhiAttachment a;
  a.column = "phi_unit:chrono+unpinned+loose:sentiment_compound:full";
  a.by_discussion["d1"] = phi_unit(0.0);  // a zero phi attaches 0.5

  std::map<std::string, Transform> overrides;
  for (const char* col : {"sentiment_pos", "sentiment_neg", "lexical_diversity",
                          "readability", "topical_similarity", "num_punctuation",
                          "num_sentences", "level_in_tree", "tree_size", "tree_height",
                          "num_replies", "upvotes", "downvotes",
                          "num_comments_in_discussion", "mean_upvotes_in_discussion",
                          "mean_downvotes_in_discussion"})
    overrides[col] = Transform::None;
  export_regression_table(r.discussions, table, dir.path / "t.csv", overrides, {a});

  const auto rows = read_csv(dir.path / "t.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].back() == a.column);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].back() == "0.5");
}

TEST_CASE("transforms preserve rank order") {
  SynthConfig cfg;
  cfg.n_comments = 200;
  cfg.seed = 3;
  const Discussion d = generate_discussion(cfg).discussion;
  std::vector<double> column;
  for (const Comment& c : d.comments) column.push_back(c.upvotes);

  std::vector<double> transformed = column;
  for (double& v : transformed) v = std::log1p(v);
  const double n = static_cast<double>(transformed.size());
  double mean = 0.0;
  for (double v : transformed) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : transformed) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  for (double& v : transformed) v = (v - mean) / sd;

  for (std::size_t i = 0; i < column.size(); ++i)
    for (std::size_t j = i + 1; j < column.size(); ++j) {
      if (column[i] < column[j]) CHECK(transformed[i] < transformed[j]);
      if (column[i] == column[j]) CHECK(transformed[i] == doctest::Approx(transformed[j]));
    }
}

TEST_CASE("csv escaping round-trips awkward fields") {
  TempDir dir;
  std::ofstream out(dir.path / "x.csv", std::ios::binary);
  const std::vector<std::string> row = {"plain", "with,comma", "with\"quote",
                                        "multi\nline", ""};
  write_csv_row(out, row);
  write_csv_row(out, {"second", "row", "a", "b", "c"});
  out.close();
  const auto rows = read_csv(dir.path / "x.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == row);
}
