// Compares the serial reference evaluator against the OpenMP kernel on a
// synthetic corpus and verifies they produce identical rows.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commentrank/forum.hpp"
#include "commentrank/policy.hpp"
#include "commentrank/synth.hpp"
#include "commentrank/textfeat.hpp"

using namespace commentrank;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool same_rows(const std::vector<ForumResult>& a, const std::vector<ForumResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].discussion_id != b[i].discussion_id || a[i].policy_id != b[i].policy_id ||
        a[i].feature != b[i].feature || a[i].n_label != b[i].n_label ||
        a[i].skipped != b[i].skipped)
      return false;
    if (!a[i].skipped && (a[i].phi != b[i].phi || a[i].phi_unit != b[i].phi_unit))
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel policy-evaluation benchmark"};
  int discussions = 40;
  int mean_comments = 250;
  std::uint64_t seed = 7;
  int jobs = 0;
  app.add_option("--discussions", discussions);
  app.add_option("--mean-comments", mean_comments);
  app.add_option("--seed", seed);
  app.add_option("--jobs", jobs, "Threads for the parallel run (0 = all)");
  CLI11_PARSE(app, argc, argv);

  SynthCorpusConfig config;
  config.n_discussions = discussions;
  config.mean_comments = mean_comments;
  config.base.seed = seed;

  auto t0 = Clock::now();
  const std::vector<SynthDiscussion> corpus = generate_corpus(config);
  std::vector<Discussion> discs;
  FeatureTable table;
  std::size_t total_comments = 0;
  for (const SynthDiscussion& s : corpus) {
    discs.push_back(s.discussion);
    table.scores.push_back(s.scores);
    total_comments += s.scores.size();
  }
  // Offsets over the synthetic scores, same rule as the text pipeline.
  for (const std::string& f : kForumFeatures) {
    double min = 0.0;
    for (std::size_t d = 0; d < table.scores.size(); ++d)
      for (std::size_t c = 0; c < table.scores[d].size(); ++c)
        min = std::min(min, table.raw_value(f, static_cast<int>(d), static_cast<int>(c)));
    table.forum_offset[f] = min < 0.0 ? -min : 0.0;
  }
  std::printf("corpus: %d discussions, %zu comments (%.0f ms)\n", discussions, total_comments,
              ms_since(t0));

  const std::vector<PolicyDescriptor> policies = enumerate_policies(config.base.external_columns);
  EvalOptions options;
  options.seed = seed;
  options.jobs = jobs;

  t0 = Clock::now();
  const auto serial = evaluate_all_serial(discs, table, policies, kForumFeatures, options);
  const double serial_ms = ms_since(t0);
  std::printf("serial:   %8.1f ms  (%zu rows)\n", serial_ms, serial.size());

  t0 = Clock::now();
  const auto parallel = evaluate_all(discs, table, policies, kForumFeatures, options);
  const double parallel_ms = ms_since(t0);
  std::printf("parallel: %8.1f ms  (speedup %.2fx)\n", parallel_ms, serial_ms / parallel_ms);

  if (!same_rows(serial, parallel)) {
    std::fprintf(stderr, "FAIL: serial and parallel results differ\n");
    return 1;
  }
  std::printf("results identical\n");
  return 0;
}
