// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emem/csv.hpp"
#include "emem/error.hpp"
#include "oracles.hpp"

namespace emem::stats {
namespace {

using C = Condition;
using L = SimilarityLevel;

std::vector<RatingRecord> load_ratings() { return parse_ratings(csv::read_file(EMEM_FIXTURE_DIR "/fear_conditioning.csv")); }
std::vector<DecisionRecord> load_decisions(const char* name) {
  return parse_decisions(csv::read_file(std::string(EMEM_FIXTURE_DIR "/") + name));
}

std::vector<RatingRecord> random_records(std::mt19937_64& rng, C a, C b, std::size_t per_level) {
  std::uniform_real_distribution<double> rating(1.0, 10.0);
  std::vector<RatingRecord> out;
  for (C c : {a, b})
    for (L l : kAllLevels)
      for (std::size_t k = 0; k < per_level; ++k)
        out.push_back({c, "s" + std::to_string(k), l, std::round(rating(rng) * 4) / 4, rating(rng)});
  return out;
}

TEST(Csv, QuotesCommentsAndCrlf) {
  auto t = csv::parse("a,b\r\n# comment\r\n\"x, y\",\"he said \"\"hi\"\"\"\r\n\r\n1,2\r\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.line_numbers[1], 5u);
  EXPECT_THROW(csv::parse("a,b\n1\n"), Error);
  EXPECT_EQ(csv::quote("plain"), "plain");
  EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
  EXPECT_THROW(t.require_column("zzz"), Error);
}

TEST(Parse, EnumsAreCaseInsensitiveAndStrict) {
  EXPECT_EQ(parse_condition("bc"), C::kBC);
  EXPECT_EQ(parse_similarity("HIGH"), L::kHigh);
  EXPECT_EQ(parse_ordering("Blue_First"), Ordering::kBlueFirst);
  EXPECT_EQ(parse_outcome("invalid"), Outcome::kInvalid);
  EXPECT_THROW(parse_condition("D"), Error);
  EXPECT_THROW(parse_similarity("medium-ish"), Error);
  EXPECT_EQ(to_string(C::kBC), "BC");
}

TEST(Parse, RatingsOutOfRangeNamesTheLine) {
  auto t = csv::parse("condition,scenario,similarity,threat,warmth\nA,s,low,3,4\nB,s,low,11,4\n");
  try {
    parse_ratings(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Means, SingleRecordIsItself) {
  std::vector<RatingRecord> one{{C::kB, "s", L::kLow, 3.5, 7.25}};
  auto m = condition_means(one);
  EXPECT_EQ(m.at(C::kB).threat, 3.5);
  EXPECT_EQ(m.at(C::kB).warmth, 7.25);
  EXPECT_EQ(m.at(C::kB).n, 1u);
  EXPECT_EQ(m.at(C::kA).n, 0u);
  EXPECT_TRUE(std::isnan(m.at(C::kA).threat));
}

TEST(Means, FixtureReproducesReferenceTables) {
  auto recs = load_ratings();
  struct Row {
    C c;
    double threat, warmth;
    std::size_t n;
  };
  const Row medium[] = {{C::kA, 3.45, 5.10, 40}, {C::kC, 4.88, 3.90, 40}, {C::kB, 6.60, 2.17, 40}, {C::kBC, 7.33, 1.90, 40}};
  const Row safe[] = {{C::kA, 2.45, 5.95, 20}, {C::kC, 1.80, 6.50, 20}, {C::kB, 1.15, 7.60, 20}, {C::kBC, 1.80, 6.20, 20}};
  auto mm = condition_means(recs, L::kMedium);
  for (const auto& r : medium) {
    EXPECT_NEAR(mm.at(r.c).threat, r.threat, 1e-9);
    EXPECT_NEAR(mm.at(r.c).warmth, r.warmth, 1e-9);
    EXPECT_EQ(mm.at(r.c).n, r.n);
  }
  auto ms = condition_means(recs, L::kSafe);
  for (const auto& r : safe) {
    EXPECT_NEAR(ms.at(r.c).threat, r.threat, 1e-9);
    EXPECT_NEAR(ms.at(r.c).warmth, r.warmth, 1e-9);
    EXPECT_EQ(ms.at(r.c).n, r.n);
  }
}

TEST(Means, MatchNaiveGroupBy) {
  std::mt19937_64 rng(2);
  auto recs = random_records(rng, C::kA, C::kBC, 7);
  for (auto level : kAllLevels) {
    auto m = condition_means(recs, level);
    for (C c : {C::kA, C::kBC}) {
      double t = 0, w = 0, n = 0;
      for (const auto& r : recs)
        if (r.condition == c && r.similarity == level) t += r.threat, w += r.warmth, n += 1;
      EXPECT_NEAR(m.at(c).threat, t / n, 1e-9);
      EXPECT_NEAR(m.at(c).warmth, w / n, 1e-9);
    }
  }
}

TEST(Ols, TrivialCases) {
  std::vector<double> x{0, 1, 2}, y{1, 2, 3}, flat{4, 4, 4};
  EXPECT_NEAR(ols_slope(x, y), 1.0, 1e-12);
  EXPECT_NEAR(ols_slope(x, flat), 0.0, 1e-12);
  std::vector<double> same{1, 1, 1};
  EXPECT_THROW(ols_slope(same, y), Error);
  EXPECT_THROW(ols_slope(x, std::vector<double>{1, 2}), Error);
}

TEST(Ols, ClosedFormOracleAndEquivariance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = u(rng), y[i] = 2.0 * x[i] + u(rng);
    const double s = ols_slope(x, y);
    EXPECT_NEAR(s, oracle::normal_equation_slope(x, y), 1e-9);
    for (double c : {0.5, 3.0, 10.0}) {
      std::vector<double> xc(x);
      for (auto& v : xc) v *= c;
      EXPECT_NEAR(ols_slope(xc, y), s / c, 1e-9);
    }
  }
}

TEST(Ols, FixtureSlopesMatchReferenceGradients) {
  auto recs = load_ratings();
  EXPECT_NEAR(ols_slope(recs, C::kA), 0.557, 1e-9);
  EXPECT_NEAR(ols_slope(recs, C::kC), 0.799, 1e-9);
  EXPECT_NEAR(ols_slope(recs, C::kB), 1.195, 1e-9);
  EXPECT_NEAR(ols_slope(recs, C::kBC), 1.130, 1e-9);
  SimilarityCoding doubled;
  doubled.values = {0, 2, 4, 6};
  EXPECT_NEAR(ols_slope(recs, C::kB, doubled), 1.195 / 2, 1e-9);
  EXPECT_EQ(SimilarityCoding::parse("0,2,4,6").values, doubled.values);
  EXPECT_THROW(SimilarityCoding::parse("0,1,2"), Error);
  EXPECT_THROW(SimilarityCoding::parse("0,1,2,3,4"), Error);
}

TEST(Permutation, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 6; ++trial) {
    // Two levels, up to four ratings per condition per level: at most 8 per condition.
    std::uniform_real_distribution<double> rating(1.0, 10.0);
    std::vector<RatingRecord> recs;
    const std::size_t per = 2 + trial % 3;
    for (C c : {C::kA, C::kC})
      for (L l : {L::kSafe, L::kHigh})
        for (std::size_t k = 0; k < per; ++k)
          recs.push_back({c, "s", l, rating(rng) + (c == C::kC && l == L::kHigh ? 2.0 : 0.0), 5.0});
    for (auto [side, two] : {std::pair{Sidedness::kGreater, false}, {Sidedness::kTwoSided, true}}) {
      PermutationOptions opt;
      opt.seed = 1000 + trial;
      opt.sidedness = side;
      auto r = permutation_test_slope_diff(recs, C::kA, C::kC, opt);
      const double exact = oracle::exhaustive_permutation_p(recs, C::kA, C::kC, two);
      EXPECT_NEAR(r.p_value, exact, 0.02) << "trial " << trial;
      EXPECT_NEAR(r.observed_diff, ols_slope(recs, C::kC) - ols_slope(recs, C::kA), 1e-9);
    }
  }
}

TEST(Permutation, IdenticalDataGivesLargeP) {
  std::mt19937_64 rng(3);
  auto recs = random_records(rng, C::kA, C::kA, 3);
  for (std::size_t i = recs.size() / 2; i < recs.size(); ++i) recs[i].condition = C::kB;
  for (std::size_t i = 0; i < recs.size() / 2; ++i) recs[recs.size() / 2 + i].threat = recs[i].threat;
  PermutationOptions opt;
  opt.seed = 5;
  auto r = permutation_test_slope_diff(recs, C::kA, C::kB, opt);
  EXPECT_NEAR(r.observed_diff, 0.0, 1e-12);
  EXPECT_GE(r.p_value, 0.5);
}

TEST(Permutation, SeededAndIndependentOfWorkersAndOrder) {
  auto recs = load_ratings();
  PermutationOptions opt;
  opt.iterations = 2000;
  opt.seed = 11;
  auto one = permutation_test_slope_diff(recs, C::kA, C::kC, opt);
  opt.workers = 3;
  auto three = permutation_test_slope_diff(recs, C::kA, C::kC, opt);
  EXPECT_EQ(one.extreme_count, three.extreme_count);
  EXPECT_EQ(one.p_value, three.p_value);
  EXPECT_EQ(one.seed, 11u);

  std::mt19937_64 rng(8);
  std::shuffle(recs.begin(), recs.end(), rng);
  opt.workers = 1;
  auto shuffled = permutation_test_slope_diff(recs, C::kA, C::kC, opt);
  EXPECT_EQ(shuffled.extreme_count, one.extreme_count);
  EXPECT_NEAR(shuffled.observed_diff, one.observed_diff, 1e-12);
  EXPECT_NEAR(one.observed_diff, 0.799 - 0.557, 1e-9);
  EXPECT_GT(one.p_value, 0.0);
  EXPECT_LE(one.p_value, 1.0);

  opt.seed = 12;
  auto other = permutation_test_slope_diff(recs, C::kA, C::kC, opt);
  EXPECT_NE(other.extreme_count, one.extreme_count);
}

TEST(Permutation, ScenarioUnitsMoveTogether) {
  auto recs = load_ratings();
  PermutationOptions opt;
  opt.iterations = 500;
  opt.unit = PermutationUnit::kScenario;
  auto r = permutation_test_slope_diff(recs, C::kA, C::kB, opt);
  EXPECT_NEAR(r.observed_diff, 1.195 - 0.557, 1e-9);
  EXPECT_GT(r.p_value, 0.0);

  // With one scenario per condition per level the scenario-level null has
  // exactly 2^4 relabellings; p is a multiple of nothing finer than that.
  std::vector<RatingRecord> small;
  for (C c : {C::kA, C::kB})
    for (L l : kAllLevels)
      for (int k = 0; k < 3; ++k) small.push_back({c, "only", l, 1.0 + double(l) * (c == C::kB ? 2 : 1) + k * 0.1, 5});
  opt.iterations = 4000;
  auto s = permutation_test_slope_diff(small, C::kA, C::kB, opt);
  // Swapping level l moves the diff by -2 (x_l - mean x) d_l with d_l = l, so
  // flipping level 0, level 1 or both never lowers it: 4 of the 16 reach it.
  EXPECT_NEAR(s.p_value, 4.0 / 16.0, 0.02);
}

TEST(Permutation, Errors) {
  auto recs = load_ratings();
  EXPECT_THROW(permutation_test_slope_diff(recs, C::kA, C::kA), Error);
  PermutationOptions zero;
  zero.iterations = 0;
  EXPECT_THROW(permutation_test_slope_diff(recs, C::kA, C::kB, zero), Error);
  std::vector<RatingRecord> one_level{{C::kA, "s", L::kLow, 2, 2}, {C::kB, "s", L::kLow, 3, 3}};
  EXPECT_THROW(permutation_test_slope_diff(one_level, C::kA, C::kB), Error);
}

TEST(ZTest, ReferenceValues) {
  EXPECT_NEAR(two_proportion_z(32, 40, 8, 40), 5.37, 0.05);
  EXPECT_NEAR(two_proportion_z(21, 40, 8, 40), 3.02, 0.05);
  EXPECT_NEAR(two_proportion_z(32, 40, 21, 40), 2.60, 0.05);
  EXPECT_NEAR(two_proportion_z(9, 40, 8, 40), 0.27, 0.05);
}

TEST(ZTest, FormulaOracleAntisymmetryAndErrors) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n1 = 1 + rng() % 60, n2 = 1 + rng() % 60;
    const std::size_t g1 = rng() % (n1 + 1), g2 = rng() % (n2 + 1);
    const double p = double(g1 + g2) / double(n1 + n2);
    if (p == 0.0 || p == 1.0) {
      EXPECT_THROW(two_proportion_z(g1, n1, g2, n2), Error);
      continue;
    }
    const double want = (double(g1) / n1 - double(g2) / n2) / std::sqrt(p * (1 - p) * (1.0 / n1 + 1.0 / n2));
    EXPECT_NEAR(two_proportion_z(g1, n1, g2, n2), want, 1e-12);
    EXPECT_EQ(two_proportion_z(g1, n1, g2, n2), -two_proportion_z(g2, n2, g1, n1));
  }
  EXPECT_EQ(two_proportion_z(5, 10, 10, 20), 0.0);
  EXPECT_THROW(two_proportion_z(1, 0, 1, 2), Error);
  EXPECT_THROW(two_proportion_z(3, 2, 1, 2), Error);
  // Unpooled variance differs but has the same sign.
  EXPECT_GT(two_proportion_z(32, 40, 8, 40, Variance::kUnpooled), 5.37);
}

TEST(Proportions, AllInvalidLeavesNoProportion) {
  std::vector<DecisionRecord> recs(3, DecisionRecord{C::kA, Ordering::kRedFirst, Outcome::kInvalid, {}});
  auto t = proportion_table(recs);
  EXPECT_EQ(t.invalid_total, 3u);
  EXPECT_EQ(t.by_condition.at(C::kA).valid(), 0u);
  EXPECT_TRUE(std::isnan(t.by_condition.at(C::kA).percent_good()));
  EXPECT_TRUE(standard_comparisons(t).empty());
}

TEST(Proportions, FixtureReproducesReferencePercentages) {
  auto t = proportion_table(load_decisions("forced_choice.csv"));
  // Reference percentages are truncated to whole numbers (9/40 prints as 22%).
  auto pct = [&](C c) { return std::floor(t.by_condition.at(c).percent_good()); };
  EXPECT_EQ(pct(C::kA), 20);
  EXPECT_EQ(pct(C::kC), 22);
  EXPECT_EQ(pct(C::kB), 52);
  EXPECT_EQ(pct(C::kBC), 80);
  for (C c : kAllConditions) EXPECT_EQ(t.by_condition.at(c).valid(), 40u);
  EXPECT_EQ(t.by_ordering.at({C::kA, Ordering::kBlueFirst}).percent_good(), 0.0);
  EXPECT_EQ(t.by_ordering.at({C::kB, Ordering::kBlueFirst}).percent_good(), 10.0);
  EXPECT_EQ(t.by_ordering.at({C::kBC, Ordering::kBlueFirst}).percent_good(), 70.0);

  auto z = standard_comparisons(t);
  ASSERT_EQ(z.size(), 4u);
  EXPECT_NEAR(z[0].z, 0.27, 0.05);  // C vs A
  EXPECT_NEAR(z[1].z, 3.02, 0.05);  // B vs A
  EXPECT_NEAR(z[2].z, 5.37, 0.05);  // BC vs A
  EXPECT_NEAR(z[3].z, 2.60, 0.05);  // BC vs B
}

TEST(Proportions, RandomRecordsMatchNaiveCount) {
  std::mt19937_64 rng(10);
  std::vector<DecisionRecord> recs;
  for (int i = 0; i < 400; ++i)
    recs.push_back({kAllConditions[rng() % 4], rng() % 2 ? Ordering::kBlueFirst : Ordering::kRedFirst,
                    static_cast<Outcome>(rng() % 3), {}});
  auto t = proportion_table(recs);
  for (C c : kAllConditions) {
    std::size_t good = 0, valid = 0;
    for (const auto& r : recs)
      if (r.condition == c && r.outcome != Outcome::kInvalid) valid++, good += r.outcome == Outcome::kGood;
    EXPECT_EQ(t.by_condition.at(c).valid(), valid);
    EXPECT_NEAR(t.by_condition.at(c).percent_good(), 100.0 * good / valid, 1e-12);
  }
}

TEST(Proportions, AlphaSweepGroupsByAlpha) {
  auto sweep = alpha_sweep(load_decisions("alpha_sweep.csv"));
  ASSERT_EQ(sweep.size(), 7u);
  EXPECT_EQ(sweep.begin()->first, 0.01);
  const auto& last = sweep.rbegin()->second.at(C::kBC);
  EXPECT_EQ(last.valid(), 30u);
  EXPECT_EQ(last.invalid, 4u);
  EXPECT_GT(last.percent_good(), sweep.begin()->second.at(C::kBC).percent_good());
}

}  // namespace
}  // namespace emem::stats
