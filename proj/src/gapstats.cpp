#include "commentrank/gapstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "commentrank/csv.hpp"
#include "commentrank/rng.hpp"

namespace commentrank {

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

const char* vote_key_token(VoteKey key) {
  return key == VoteKey::Upvotes ? "upvotes" : "relvotes";
}

}  // namespace

GapPair jaccard_gap(const Discussion& discussion, VoteKey key, std::uint64_t seed) {
  std::vector<int> pinned;
  for (int i = 0; i < discussion.n(); ++i)
    if (discussion.comments[i].pinned) pinned.push_back(i);
  if (pinned.empty())
    throw Error("jaccard_gap: discussion '" + discussion.discussion_id +
                "' has no pinned comments");
  const auto p = static_cast<std::size_t>(pinned.size());

  std::vector<int> idx(discussion.comments.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto vote = [&](int i) -> double {
    const Comment& c = discussion.comments[i];
    return key == VoteKey::Upvotes ? c.upvotes : c.relative_votes();
  };
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return vote(a) > vote(b); });

  // Same tie handling as the ranking policies: seeded shuffle per tie group.
  Rng rng(derive_seed(seed, discussion.discussion_id,
                      std::string("gap:") + vote_key_token(key)));
  std::size_t lo = 0;
  while (lo < idx.size()) {
    std::size_t hi = lo + 1;
    while (hi < idx.size() && vote(idx[hi]) == vote(idx[lo])) ++hi;
    if (hi - lo > 1) rng.shuffle(idx.begin() + lo, idx.begin() + hi);
    lo = hi;
  }

  const std::set<int> top(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(p));
  std::size_t intersection = 0;
  for (int i : pinned) intersection += top.count(i);

  GapPair out;
  out.p = static_cast<int>(p);
  const std::size_t uni = 2 * p - intersection;
  out.jaccard = static_cast<double>(intersection) / static_cast<double>(uni);
  out.overlap = static_cast<double>(intersection) / static_cast<double>(p);
  return out;
}

double coeff_to_forum_delta(double beta) {
  if (!std::isfinite(beta)) throw Error("coeff_to_forum_delta: non-finite coefficient");
  return std::tanh(beta / 2.0);
}

std::vector<CoefficientRow> read_coefficients(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw ParseError(path.string() + ": empty coefficient file");
  const auto& header = rows.front();
  auto col = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ParseError(path.string() + ": missing column '" + std::string(name) + "'");
  };
  const int c_feature = col("feature");
  const int c_pick = col("beta_pick");
  const int c_up = col("beta_up");
  const int c_down = col("beta_down");

  auto parse_opt = [&](const std::vector<std::string>& row, int c,
                       std::size_t line) -> std::optional<double> {
    if (c >= static_cast<int>(row.size()) || row[c].empty()) return std::nullopt;
    try {
      return std::stod(row[c]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                       row[c] + "'");
    }
  };

  std::vector<CoefficientRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty() || (rows[i].size() == 1 && rows[i][0].empty())) continue;
    CoefficientRow r;
    r.feature = rows[i][c_feature];
    r.beta_pick = parse_opt(rows[i], c_pick, i + 1);
    r.beta_up = parse_opt(rows[i], c_up, i + 1);
    r.beta_down = parse_opt(rows[i], c_down, i + 1);
    out.push_back(std::move(r));
  }
  return out;
}

PinTimeStats pin_time_stats(const std::vector<Discussion>& discussions) {
  std::vector<double> pinned_minutes, other_minutes, pinned_pct, other_pct;
  for (const Discussion& d : discussions) {
    const int n = d.n();
    if (n == 0) continue;
    const std::int64_t first = d.comments.front().timestamp;  // canonical order
    for (int i = 0; i < n; ++i) {
      const double minutes =
          static_cast<double>(d.comments[i].timestamp - first) / 60.0;
      const double pct =
          n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
      if (d.comments[i].pinned) {
        pinned_minutes.push_back(minutes);
        pinned_pct.push_back(pct);
      } else {
        other_minutes.push_back(minutes);
        other_pct.push_back(pct);
      }
    }
  }
  PinTimeStats s;
  s.pinned_count = pinned_minutes.size();
  s.other_count = other_minutes.size();
  s.pinned_minutes_median = median(std::move(pinned_minutes));
  s.other_minutes_median = median(std::move(other_minutes));
  s.pinned_percentile_median = median(std::move(pinned_pct));
  s.other_percentile_median = median(std::move(other_pct));
  return s;
}

GapReport build_gap_report(const std::vector<Discussion>& discussions, std::uint64_t seed) {
  GapReport report;
  for (const Discussion& d : discussions) {
    const bool has_pins =
        std::any_of(d.comments.begin(), d.comments.end(), [](const Comment& c) { return c.pinned; });
    if (!has_pins) continue;  // the gap is defined only where editors picked
    DiscussionGapRow row;
    row.discussion_id = d.discussion_id;
    row.upvotes = jaccard_gap(d, VoteKey::Upvotes, seed);
    row.relative_votes = jaccard_gap(d, VoteKey::RelativeVotes, seed);
    row.p = row.upvotes.p;
    report.per_discussion.push_back(std::move(row));
  }
  const auto k = static_cast<double>(report.per_discussion.size());
  if (k > 0) {
    for (const DiscussionGapRow& r : report.per_discussion) {
      report.mean_jaccard_upvotes += r.upvotes.jaccard / k;
      report.mean_overlap_upvotes += r.upvotes.overlap / k;
      report.mean_jaccard_relative += r.relative_votes.jaccard / k;
      report.mean_overlap_relative += r.relative_votes.overlap / k;
    }
  }
  report.pin_times = pin_time_stats(discussions);
  return report;
}

void write_gap_per_discussion_csv(const std::filesystem::path& path, const GapReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_csv_row(out, {"discussion_id", "p", "jaccard_upvotes", "overlap_upvotes",
                      "jaccard_relvotes", "overlap_relvotes"});
  for (const DiscussionGapRow& r : report.per_discussion)
    write_csv_row(out, {r.discussion_id, std::to_string(r.p), fmt_double(r.upvotes.jaccard),
                        fmt_double(r.upvotes.overlap), fmt_double(r.relative_votes.jaccard),
                        fmt_double(r.relative_votes.overlap)});
}

void write_gap_summary_csv(const std::filesystem::path& path, const GapReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_csv_row(out, {"metric", "value"});
  write_csv_row(out, {"discussions_with_pins", std::to_string(report.per_discussion.size())});
  write_csv_row(out, {"mean_jaccard_upvotes", fmt_double(report.mean_jaccard_upvotes)});
  write_csv_row(out, {"mean_overlap_upvotes", fmt_double(report.mean_overlap_upvotes)});
  write_csv_row(out, {"mean_jaccard_relvotes", fmt_double(report.mean_jaccard_relative)});
  write_csv_row(out, {"mean_overlap_relvotes", fmt_double(report.mean_overlap_relative)});
  write_csv_row(out, {"pinned_comments", std::to_string(report.pin_times.pinned_count)});
  write_csv_row(out, {"other_comments", std::to_string(report.pin_times.other_count)});
  write_csv_row(out, {"pinned_minutes_median", fmt_double(report.pin_times.pinned_minutes_median)});
  write_csv_row(out, {"other_minutes_median", fmt_double(report.pin_times.other_minutes_median)});
  write_csv_row(out,
                {"pinned_percentile_median", fmt_double(report.pin_times.pinned_percentile_median)});
  write_csv_row(out,
                {"other_percentile_median", fmt_double(report.pin_times.other_percentile_median)});
}

void write_coefficient_report_csv(const std::filesystem::path& path,
                                  const std::vector<CoefficientRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_csv_row(out, {"feature", "beta_pick", "beta_up", "beta_down", "rvp", "comment_gap",
                      "delta_phi_pick", "delta_phi_up", "delta_phi_down"});
  auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  for (const CoefficientRow& r : rows) {
    std::optional<double> rvp_value, gap_value;
    if (r.beta_up && r.beta_down) rvp_value = rvp(*r.beta_up, *r.beta_down);
    if (r.beta_pick && rvp_value) gap_value = comment_gap(*r.beta_pick, *rvp_value);
    auto delta = [&](const std::optional<double>& beta) -> std::optional<double> {
      if (!beta) return std::nullopt;
      return coeff_to_forum_delta(*beta);
    };
    write_csv_row(out, {r.feature, opt(r.beta_pick), opt(r.beta_up), opt(r.beta_down),
                        opt(rvp_value), opt(gap_value), opt(delta(r.beta_pick)),
                        opt(delta(r.beta_up)), opt(delta(r.beta_down))});
  }
}

}  // namespace commentrank
