#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commentrank/model.hpp"
#include "commentrank/policy.hpp"
#include "commentrank/textfeat.hpp"

namespace commentrank {

// Running feature-score totals t_1..t_N for one ordering.
struct CumulativeCurve {
  std::vector<double> t;
  double total = 0.0;  // t_N

  int n() const { return static_cast<int>(t.size()); }
};

// Best (descending sort), worst (ascending sort) and the linear random
// baseline i*T/N for one score multiset.
struct BaselineCurves {
  CumulativeCurve best;
  CumulativeCurve worst;
  double total = 0.0;
  int n = 0;

  double random_at(int i) const {  // 1-based
    return static_cast<double>(i) * total / static_cast<double>(n);
  }
};

// Below this, cumulative deltas are treated as zero: no discrimination is
// possible at that position and the normalised delta is defined as 0. The
// threshold absorbs float accumulation noise for all-equal score columns.
inline double delta_epsilon(double total) {
  return 1e-9 * std::max(1.0, std::abs(total));
}

// Scores must already be offset to non-negative.
CumulativeCurve cumulative_curve(std::span<const double> scores_in_order);

BaselineCurves baseline_curves(std::span<const double> scores);

// Normalised policy delta at position i (1-based, i < N): the policy
// curve's excess over the random baseline, divided by the best achievable
// excess when non-negative and the worst when negative. i = N is undefined
// (division by zero) and throws.
double gamma(const CumulativeCurve& policy_curve, const BaselineCurves& baselines, int i);

// Extends a visible-prefix curve linearly up to the discussion total, as if
// each hidden comment were equally likely to be viewed next. The final
// point is exactly `total_score`.
CumulativeCurve interpolate_hidden(const CumulativeCurve& visible, int n_total,
                                   double total_score);

// Affine map from [-1, 1] onto [0, 1].
double phi_unit(double phi);

struct ForumResult {
  std::string discussion_id;
  std::string policy_id;
  std::string feature;
  std::string n_label;      // requested: "10", "25", "full", ...
  int n = 0;                // effective positions averaged (clamped to N-1)
  double phi = 0.0;
  double phi_unit = 0.5;
  std::vector<double> gammas;  // filled by forum_score, empty in bulk runs
  bool skipped = false;
  std::string skip_reason;
};

// Phi over the first n positions of a display ordering. Omitted n means the
// full discussion (N-1); larger requests clamp to N-1. Single-comment
// discussions are skipped (no ranking freedom).
ForumResult forum_score(const Discussion& discussion, const DisplayOrdering& display,
                        std::span<const double> scores, std::optional<int> n = std::nullopt);

// Same computation without a Discussion, for synthetic orderings in tests
// and tools: `order` is a permutation of 0..N-1, the first `visible` of
// which are shown.
ForumResult score_ordering(std::span<const double> scores, std::span<const int> order,
                           int visible, std::optional<int> n = std::nullopt);

struct EvalOptions {
  std::vector<std::optional<int>> n_list = {10, std::nullopt};  // nullopt = full
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = all hardware threads (parallel build only)
};

// The full (discussion x policy x feature x n) grid, rows in deterministic
// grid order regardless of thread count. OpenMP-parallel over
// (discussion, policy) cells; baselines are shared per (discussion, feature).
std::vector<ForumResult> evaluate_all(const std::vector<Discussion>& discussions,
                                      const FeatureTable& features,
                                      const std::vector<PolicyDescriptor>& policies,
                                      const std::vector<std::string>& feature_names,
                                      const EvalOptions& options);

// Straightforward serial reference: one forum_score call per grid row.
// Kept for A/B testing against the parallel kernel.
std::vector<ForumResult> evaluate_all_serial(const std::vector<Discussion>& discussions,
                                             const FeatureTable& features,
                                             const std::vector<PolicyDescriptor>& policies,
                                             const std::vector<std::string>& feature_names,
                                             const EvalOptions& options);

std::string n_label(std::optional<int> n);

void write_forum_csv(const std::filesystem::path& path,
                     const std::vector<ForumResult>& results);

// Mean and quartiles per (policy, feature, n) over non-skipped rows.
void write_forum_summary_csv(const std::filesystem::path& path,
                             const std::vector<ForumResult>& results);

}  // namespace commentrank
