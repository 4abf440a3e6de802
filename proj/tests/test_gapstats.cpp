#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "commentrank/gapstats.hpp"
#include "commentrank/rng.hpp"
#include "commentrank/synth.hpp"

using namespace commentrank;

namespace {

Comment make(const std::string& id, std::int64_t ts, int up, int down, bool pinned) {
  Comment c;
  c.comment_id = id;
  c.discussion_id = "g1";
  c.timestamp = ts;
  c.upvotes = up;
  c.downvotes = down;
  c.pinned = pinned;
  return c;
}

}  // namespace

TEST_CASE("jaccard gap on a hand-built discussion") {
  // Pinned {A, B}; top-2 by upvotes {B, C}.
  const Discussion d = build_discussion({
      make("A", 1, 4, 0, true),
      make("B", 2, 9, 0, true),
      make("C", 3, 8, 0, false),
      make("D", 4, 1, 0, false),
  });
  const GapPair g = jaccard_gap(d, VoteKey::Upvotes, 1);
  CHECK(g.p == 2);
  CHECK(g.jaccard == doctest::Approx(1.0 / 3.0));
  CHECK(g.overlap == doctest::Approx(0.5));
}

TEST_CASE("jaccard gap is exact when pins match the top") {
  const Discussion d = build_discussion({
      make("A", 1, 9, 0, true),
      make("B", 2, 8, 0, true),
      make("C", 3, 1, 0, false),
  });
  const GapPair g = jaccard_gap(d, VoteKey::Upvotes, 1);
  CHECK(g.jaccard == doctest::Approx(1.0));
  CHECK(g.overlap == doctest::Approx(1.0));
}

TEST_CASE("jaccard gap needs a pinned comment") {
  const Discussion d = build_discussion({make("A", 1, 1, 0, false)});
  CHECK_THROWS_AS(jaccard_gap(d, VoteKey::Upvotes, 1), Error);
}

TEST_CASE("relative votes key uses up minus down") {
  // By upvotes the top comment is B; by relative votes it is A.
  const Discussion d = build_discussion({
      make("A", 1, 7, 0, true),   // rel 7
      make("B", 2, 9, 4, false),  // rel 5
      make("C", 3, 8, 6, false),  // rel 2
  });
  const GapPair up = jaccard_gap(d, VoteKey::Upvotes, 1);
  const GapPair rel = jaccard_gap(d, VoteKey::RelativeVotes, 1);
  CHECK(up.overlap == doctest::Approx(0.0));
  CHECK(rel.overlap == doctest::Approx(1.0));
}

TEST_CASE("jaccard never exceeds overlap") {
  SynthConfig cfg;
  cfg.pinned_fraction = 0.08;
  cfg.n_comments = 60;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    cfg.discussion_id = "jac-" + std::to_string(seed);
    const Discussion d = generate_discussion(cfg).discussion;
    const bool has_pins = std::any_of(d.comments.begin(), d.comments.end(),
                                      [](const Comment& c) { return c.pinned; });
    if (!has_pins) continue;
    for (VoteKey key : {VoteKey::Upvotes, VoteKey::RelativeVotes}) {
      const GapPair g = jaccard_gap(d, key, seed);
      CHECK(g.jaccard <= g.overlap + 1e-12);
      CHECK(g.jaccard >= 0.0);
      CHECK(g.overlap <= 1.0);
    }
  }
}

TEST_CASE("rvp and comment gap arithmetic") {
  CHECK(rvp(-0.021, -0.065) == doctest::Approx(0.044).epsilon(1e-9));
  CHECK(rvp(0.160, 0.191) == doctest::Approx(-0.031).epsilon(1e-9));
  CHECK(rvp(0.0, 0.0) == 0.0);

  CHECK(comment_gap(0.548, -0.031) == doctest::Approx(0.579).epsilon(1e-9));
  CHECK(comment_gap(0.137, 0.044) == doctest::Approx(0.093).epsilon(1e-9));
  CHECK(comment_gap(0.25, 0.25) == 0.0);
}

TEST_CASE("coefficient to expected phi change") {
  CHECK(coeff_to_forum_delta(0.890) == doctest::Approx(0.418).epsilon(2e-3));
  CHECK(coeff_to_forum_delta(0.773) == doctest::Approx(0.368).epsilon(2e-3));
  CHECK(coeff_to_forum_delta(0.0) == 0.0);
  CHECK(coeff_to_forum_delta(0.890) ==
        doctest::Approx((std::exp(0.890) - 1.0) / (std::exp(0.890) + 1.0)).epsilon(1e-12));
}

TEST_CASE("phi change conversion is odd, increasing and bounded") {
  Rng rng(4);
  double prev = -1.0;
  for (double beta = -6.0; beta <= 6.0; beta += 0.37) {
    const double v = coeff_to_forum_delta(beta);
    CHECK(v > -1.0);
    CHECK(v < 1.0);
    CHECK(v > prev);
    prev = v;
    CHECK(coeff_to_forum_delta(-beta) == doctest::Approx(-v).epsilon(1e-12));
  }
  (void)rng;
}

TEST_CASE("pin time statistics") {
  // Comments at t = 0, 600, 1200 seconds; the middle one pinned.
  const Discussion d = build_discussion({
      make("A", 0, 0, 0, false),
      make("B", 600, 0, 0, true),
      make("C", 1200, 0, 0, false),
  });
  const PinTimeStats s = pin_time_stats({d});
  CHECK(s.pinned_count == 1);
  CHECK(s.other_count == 2);
  CHECK(s.pinned_percentile_median == doctest::Approx(0.5));
  CHECK(s.pinned_minutes_median == doctest::Approx(10.0));

  const Discussion first_pinned = build_discussion({
      make("A", 0, 0, 0, true),
      make("B", 600, 0, 0, false),
      make("C", 1200, 0, 0, false),
  });
  CHECK(pin_time_stats({first_pinned}).pinned_percentile_median == doctest::Approx(0.0));
}

TEST_CASE("non-pinned percentile median is near one half on uniform corpora") {
  SynthConfig cfg;
  cfg.n_comments = 501;
  cfg.pinned_fraction = 0.0;
  cfg.seed = 77;
  const Discussion d = generate_discussion(cfg).discussion;
  const PinTimeStats s = pin_time_stats({d});
  CHECK(s.other_percentile_median == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("coefficient csv round trip and report") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "commentrank_gapstats_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "coeffs.csv");
    out << "feature,beta_pick,beta_up,beta_down\n";
    out << "positive_sentiment,0.137,-0.021,-0.065\n";
    out << "lexical_diversity,0.548,0.160,0.191\n";
    out << "is_root_comment,,0.116,0.433\n";
  }
  const auto rows = read_coefficients(dir / "coeffs.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].feature == "positive_sentiment");
  CHECK(*rows[0].beta_pick == doctest::Approx(0.137));
  CHECK_FALSE(rows[2].beta_pick.has_value());
  CHECK(*rows[2].beta_down == doctest::Approx(0.433));

  write_coefficient_report_csv(dir / "report.csv", rows);
  std::ifstream in(dir / "report.csv");
  std::string header, line1;
  std::getline(in, header);
  std::getline(in, line1);
  CHECK(header ==
        "feature,beta_pick,beta_up,beta_down,rvp,comment_gap,delta_phi_pick,delta_phi_up,"
        "delta_phi_down");
  CHECK(line1.find("0.044") != std::string::npos);  // rvp for the first row
  fs::remove_all(dir);
}

TEST_CASE("gap report aggregates only discussions with pins") {
  std::vector<Discussion> discussions;
  discussions.push_back(build_discussion({
      make("A", 1, 9, 0, true),
      make("B", 2, 1, 0, false),
  }));
  {
    Comment c1 = make("X", 1, 3, 0, false);
    c1.discussion_id = "g2";
    Comment c2 = make("Y", 2, 5, 0, false);
    c2.discussion_id = "g2";
    discussions.push_back(build_discussion({c1, c2}));
  }
  const GapReport report = build_gap_report(discussions, 5);
  CHECK(report.per_discussion.size() == 1);
  CHECK(report.mean_jaccard_upvotes == doctest::Approx(1.0));
  CHECK(report.mean_overlap_upvotes == doctest::Approx(1.0));
}
