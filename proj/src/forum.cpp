#include "commentrank/forum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "commentrank/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace commentrank {

CumulativeCurve cumulative_curve(std::span<const double> scores_in_order) {
  if (scores_in_order.empty()) throw Error("cumulative_curve: empty ordering");
  CumulativeCurve c;
  c.t.reserve(scores_in_order.size());
  double sum = 0.0;
  for (double s : scores_in_order) {
    if (s < 0.0)
      throw Error("cumulative_curve: negative feature score (offsetting was skipped)");
    sum += s;
    c.t.push_back(sum);
  }
  c.total = sum;
  return c;
}

BaselineCurves baseline_curves(std::span<const double> scores) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  BaselineCurves b;
  b.best = cumulative_curve(sorted);
  std::reverse(sorted.begin(), sorted.end());
  b.worst = cumulative_curve(sorted);
  b.total = b.best.total;
  b.n = b.best.n();
  return b;
}

double gamma(const CumulativeCurve& policy_curve, const BaselineCurves& baselines, int i) {
  const int n = baselines.n;
  if (i < 1 || i >= n)
    throw std::domain_error("gamma: position must be in [1, N-1], got " + std::to_string(i));
  const double tr = baselines.random_at(i);
  const double dpr = policy_curve.t[i - 1] - tr;
  const double eps = delta_epsilon(baselines.total);
  const double denom =
      dpr >= 0.0 ? baselines.best.t[i - 1] - tr : tr - baselines.worst.t[i - 1];
  if (denom <= eps) return 0.0;  // no discrimination possible at this position
  return std::clamp(dpr / denom, -1.0, 1.0);
}

CumulativeCurve interpolate_hidden(const CumulativeCurve& visible, int n_total,
                                   double total_score) {
  const int v = visible.n();
  if (v >= n_total) throw Error("interpolate_hidden: nothing hidden (V >= N)");
  CumulativeCurve full = visible;
  full.t.reserve(n_total);
  const double tv = visible.t.back();
  for (int i = v + 1; i < n_total; ++i)
    full.t.push_back(tv + static_cast<double>(i - v) * (total_score - tv) /
                              static_cast<double>(n_total - v));
  full.t.push_back(total_score);  // exact endpoint
  full.total = total_score;
  return full;
}

double phi_unit(double phi) {
  if (phi < -1.0 - 1e-12 || phi > 1.0 + 1e-12)
    throw Error("phi_unit: input outside [-1, 1]");
  return (std::clamp(phi, -1.0, 1.0) + 1.0) / 2.0;
}

std::string n_label(std::optional<int> n) {
  return n ? std::to_string(*n) : "full";
}

ForumResult score_ordering(std::span<const double> scores, std::span<const int> order,
                           int visible, std::optional<int> n) {
  const int total_n = static_cast<int>(scores.size());
  ForumResult r;
  r.n_label = n_label(n);
  if (total_n < 2) {
    r.skipped = true;
    r.skip_reason = "single-comment discussion has no ranking freedom";
    return r;
  }
  if (n && *n < 1) throw Error("forum_score: n must be >= 1");

  const BaselineCurves baselines = baseline_curves(scores);
  std::vector<double> in_order(static_cast<std::size_t>(visible));
  for (int j = 0; j < visible; ++j) in_order[j] = scores[order[j]];
  CumulativeCurve curve = cumulative_curve(in_order);
  if (visible < total_n) curve = interpolate_hidden(curve, total_n, baselines.total);

  const int eff = n ? std::min(*n, total_n - 1) : total_n - 1;
  r.n = eff;
  r.gammas.reserve(eff);
  double sum = 0.0;
  for (int i = 1; i <= eff; ++i) {
    const double g = gamma(curve, baselines, i);
    r.gammas.push_back(g);
    sum += g;
  }
  r.phi = sum / static_cast<double>(eff);
  r.phi_unit = phi_unit(r.phi);
  return r;
}

ForumResult forum_score(const Discussion& discussion, const DisplayOrdering& display,
                        std::span<const double> scores, std::optional<int> n) {
  if (static_cast<int>(scores.size()) != discussion.n() ||
      static_cast<int>(display.order.size()) != discussion.n())
    throw Error("forum_score: scores/ordering size mismatch for discussion '" +
                discussion.discussion_id + "'");
  ForumResult r = score_ordering(scores, display.order, display.visible, n);
  r.discussion_id = discussion.discussion_id;
  r.policy_id = display.policy.id();
  return r;
}

namespace {

struct DiscussionContext {
  // Per feature (in caller order): offset scores and shared baselines.
  std::vector<std::vector<double>> scores;
  std::vector<BaselineCurves> baselines;
};

// One (discussion, policy) cell: reuses the display ordering across
// features and the gamma sweep across the n-list.
void evaluate_cell(const Discussion& disc, const DiscussionContext& ctx,
                   const PolicyDescriptor& policy,
                   const std::vector<std::string>& feature_names,
                   const std::vector<std::optional<int>>& n_list, std::uint64_t seed,
                   ForumResult* out) {
  const int total_n = disc.n();
  std::size_t slot = 0;

  if (total_n < 2) {
    for (const std::string& feature : feature_names)
      for (const auto& n : n_list) {
        ForumResult& r = out[slot++];
        r.discussion_id = disc.discussion_id;
        r.policy_id = policy.id();
        r.feature = feature;
        r.n_label = n_label(n);
        r.skipped = true;
        r.skip_reason = "single-comment discussion has no ranking freedom";
      }
    return;
  }

  const DisplayOrdering display = make_display(disc, policy, seed);
  std::vector<double> in_order;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    const std::vector<double>& scores = ctx.scores[f];
    const BaselineCurves& baselines = ctx.baselines[f];

    in_order.resize(static_cast<std::size_t>(display.visible));
    for (int j = 0; j < display.visible; ++j) in_order[j] = scores[display.order[j]];
    CumulativeCurve curve = cumulative_curve(in_order);
    if (display.visible < total_n)
      curve = interpolate_hidden(curve, total_n, baselines.total);

    // One gamma sweep serves every requested n.
    int max_eff = 1;
    for (const auto& n : n_list) max_eff = std::max(max_eff, n ? std::min(*n, total_n - 1) : total_n - 1);
    std::vector<double> prefix(static_cast<std::size_t>(max_eff) + 1, 0.0);
    double sum = 0.0;
    for (int i = 1; i <= max_eff; ++i) {
      sum += gamma(curve, baselines, i);
      prefix[static_cast<std::size_t>(i)] = sum;
    }

    for (const auto& n : n_list) {
      const int eff = n ? std::min(*n, total_n - 1) : total_n - 1;
      ForumResult& r = out[slot++];
      r.discussion_id = disc.discussion_id;
      r.policy_id = policy.id();
      r.feature = feature_names[f];
      r.n_label = n_label(n);
      r.n = eff;
      r.phi = prefix[static_cast<std::size_t>(eff)] / static_cast<double>(eff);
      r.phi_unit = phi_unit(r.phi);
    }
  }
}

}  // namespace

std::vector<ForumResult> evaluate_all(const std::vector<Discussion>& discussions,
                                      const FeatureTable& features,
                                      const std::vector<PolicyDescriptor>& policies,
                                      const std::vector<std::string>& feature_names,
                                      const EvalOptions& options) {
  const std::size_t nd = discussions.size();
  const std::size_t np = policies.size();
  const std::size_t rows_per_cell = feature_names.size() * options.n_list.size();
  std::vector<ForumResult> results(nd * np * rows_per_cell);

  // Shared per-discussion state: offset score columns and baselines.
  std::vector<DiscussionContext> contexts(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    DiscussionContext& ctx = contexts[d];
    for (const std::string& feature : feature_names) {
      ctx.scores.push_back(features.forum_column(feature, static_cast<int>(d)));
      ctx.baselines.push_back(baseline_curves(ctx.scores.back()));
    }
  }

  const auto cells = static_cast<long long>(nd * np);
  std::string first_error;
#ifdef _OPENMP
  const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long long cell = 0; cell < cells; ++cell) {
    try {
      const std::size_t d = static_cast<std::size_t>(cell) / np;
      const std::size_t p = static_cast<std::size_t>(cell) % np;
      evaluate_cell(discussions[d], contexts[d], policies[p], feature_names,
                    options.n_list, options.seed,
                    results.data() + static_cast<std::size_t>(cell) * rows_per_cell);
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw Error(first_error);
  return results;
}

std::vector<ForumResult> evaluate_all_serial(const std::vector<Discussion>& discussions,
                                             const FeatureTable& features,
                                             const std::vector<PolicyDescriptor>& policies,
                                             const std::vector<std::string>& feature_names,
                                             const EvalOptions& options) {
  std::vector<ForumResult> results;
  results.reserve(discussions.size() * policies.size() * feature_names.size() *
                  options.n_list.size());
  for (std::size_t d = 0; d < discussions.size(); ++d) {
    const Discussion& disc = discussions[d];
    for (const PolicyDescriptor& policy : policies) {
      std::optional<DisplayOrdering> display;
      if (disc.n() >= 2) display = make_display(disc, policy, options.seed);
      for (const std::string& feature : feature_names) {
        const std::vector<double> scores = features.forum_column(feature, static_cast<int>(d));
        for (const auto& n : options.n_list) {
          ForumResult r;
          if (display) {
            r = forum_score(disc, *display, scores, n);
          } else {
            r.discussion_id = disc.discussion_id;
            r.policy_id = policy.id();
            r.n_label = n_label(n);
            r.skipped = true;
            r.skip_reason = "single-comment discussion has no ranking freedom";
          }
          r.feature = feature;
          r.gammas.clear();
          results.push_back(std::move(r));
        }
      }
    }
  }
  return results;
}

void write_forum_csv(const std::filesystem::path& path,
                     const std::vector<ForumResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_csv_row(out, {"discussion_id", "policy_id", "feature", "n", "phi", "phi_unit",
                      "skipped_flag"});
  for (const ForumResult& r : results) {
    write_csv_row(out, {r.discussion_id, r.policy_id, r.feature, r.n_label,
                        r.skipped ? "" : fmt_double(r.phi),
                        r.skipped ? "" : fmt_double(r.phi_unit), r.skipped ? "1" : "0"});
  }
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

void write_forum_summary_csv(const std::filesystem::path& path,
                             const std::vector<ForumResult>& results) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> skips;
  for (const ForumResult& r : results) {
    const auto key = std::make_tuple(r.policy_id, r.feature, r.n_label);
    if (r.skipped)
      ++skips[key];
    else
      groups[key].push_back(r.phi);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_csv_row(out, {"policy_id", "feature", "n", "count", "skipped", "mean_phi", "q25_phi",
                      "median_phi", "q75_phi"});
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    const auto skip_it = skips.find(key);
    write_csv_row(out, {std::get<0>(key), std::get<1>(key), std::get<2>(key),
                        std::to_string(values.size()),
                        std::to_string(skip_it == skips.end() ? 0 : skip_it->second),
                        fmt_double(mean), fmt_double(quantile_sorted(values, 0.25)),
                        fmt_double(quantile_sorted(values, 0.5)),
                        fmt_double(quantile_sorted(values, 0.75))});
  }
}

}  // namespace commentrank
