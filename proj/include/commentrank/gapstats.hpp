#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "commentrank/model.hpp"

namespace commentrank {

enum class VoteKey { Upvotes, RelativeVotes };

// Set agreement between the p pinned comments and the p top-voted comments
// of one discussion. Both readings are reported: jaccard = |I|/|U| and
// overlap = |I|/p. The top-p cut breaks vote ties with the same seeded
// tie-group shuffle the ranking policies use.
struct GapPair {
  double jaccard = 0.0;
  double overlap = 0.0;
  int p = 0;
};

GapPair jaccard_gap(const Discussion& discussion, VoteKey key, std::uint64_t seed);

// Relative Voting Preference: how much more a one-unit feature increase
// raises upvotes than downvotes (log-rate scale).
inline double rvp(double beta_up, double beta_down) { return beta_up - beta_down; }

// Journalist preference relative to readers (log-odds minus RVP).
inline double comment_gap(double beta_pick, double rvp_value) { return beta_pick - rvp_value; }

// Expected change in Phi implied by a regression coefficient:
// (e^b - 1) / (e^b + 1), i.e. tanh(b/2). Odd, strictly increasing,
// bounded in (-1, 1).
double coeff_to_forum_delta(double beta);

// Externally estimated coefficients, one row per feature. Structural rows
// may lack the pick coefficient (only roots are eligible for pinning).
struct CoefficientRow {
  std::string feature;
  std::optional<double> beta_pick;
  std::optional<double> beta_up;
  std::optional<double> beta_down;
};

// CSV with header: feature, beta_pick, beta_up, beta_down (empty = absent).
std::vector<CoefficientRow> read_coefficients(const std::filesystem::path& path);

struct DiscussionGapRow {
  std::string discussion_id;
  int p = 0;
  GapPair upvotes;
  GapPair relative_votes;
};

// Minutes-after-first-comment and time-rank percentiles, medians split by
// pin status. Percentile convention: (rank - 1) / (N - 1), so the first
// comment sits at 0.
struct PinTimeStats {
  std::size_t pinned_count = 0;
  std::size_t other_count = 0;
  double pinned_minutes_median = 0.0;
  double other_minutes_median = 0.0;
  double pinned_percentile_median = 0.0;
  double other_percentile_median = 0.0;
};

PinTimeStats pin_time_stats(const std::vector<Discussion>& discussions);

struct GapReport {
  std::vector<DiscussionGapRow> per_discussion;  // only discussions with pins
  double mean_jaccard_upvotes = 0.0;
  double mean_overlap_upvotes = 0.0;
  double mean_jaccard_relative = 0.0;
  double mean_overlap_relative = 0.0;
  PinTimeStats pin_times;
};

GapReport build_gap_report(const std::vector<Discussion>& discussions, std::uint64_t seed);

void write_gap_per_discussion_csv(const std::filesystem::path& path, const GapReport& report);
void write_gap_summary_csv(const std::filesystem::path& path, const GapReport& report);
void write_coefficient_report_csv(const std::filesystem::path& path,
                                  const std::vector<CoefficientRow>& rows);

}  // namespace commentrank
