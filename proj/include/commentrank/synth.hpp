#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "commentrank/model.hpp"

namespace commentrank {

// Deterministic synthetic discussion generator for tests, Monte-Carlo
// baselines, and desk-scale pipeline runs. Defaults track the observed
// corpus shape: 31.6% roots, long-tailed votes with mean 5.4 up / 1.4 down,
// 0.5% of comments pinned.
struct SynthConfig {
  int n_comments = 100;
  double root_fraction = 0.316;
  double reply_depth_decay = 0.55;  // parent acceptance decays per level
  double mean_upvotes = 5.4;
  double mean_downvotes = 1.4;
  double vote_dispersion = 0.7;  // negative-binomial shape; smaller = longer tail
  double pinned_fraction = 0.005;  // of all comments; pins land on roots
  std::uint64_t seed = 0;
  std::string discussion_id = "synth-1";
  std::string genre = "synthetic";
  // Name of the four generated model-score columns.
  std::vector<std::string> external_columns = {"pred_up_nbr", "pred_up_xgb", "pred_pick_lr",
                                               "pred_pick_xgb"};
};

struct SynthDiscussion {
  Discussion discussion;
  // Directly synthesized scores for metric-level tests that skip the text
  // pipeline; the generated comment text is real enough to run it too.
  std::vector<FeatureScores> scores;
};

SynthDiscussion generate_discussion(const SynthConfig& config);

// Corpus of `n_discussions` with sizes drawn around `mean_comments`
// (long-tailed, minimum 1). Discussion seeds derive from the global seed so
// generation order does not matter.
struct SynthCorpusConfig {
  int n_discussions = 10;
  int mean_comments = 100;
  SynthConfig base;  // seed here acts as the global seed
};

std::vector<SynthDiscussion> generate_corpus(const SynthCorpusConfig& config);

}  // namespace commentrank
