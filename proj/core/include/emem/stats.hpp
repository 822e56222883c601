// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Analysis of four-condition experiments: rating means, threat-gradient
// slopes with stratified permutation tests, and two-proportion z-tests on
// forced-choice decisions.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emem/csv.hpp"

namespace emem::stats {

// A: no memory, B: semantic label only, C: echo only, BC: label plus echo.
enum class Condition { kA, kB, kC, kBC };
inline constexpr std::array<Condition, 4> kAllConditions = {Condition::kA, Condition::kB, Condition::kC,
                                                            Condition::kBC};

enum class SimilarityLevel { kSafe, kLow, kMedium, kHigh };
inline constexpr std::array<SimilarityLevel, 4> kAllLevels = {SimilarityLevel::kSafe, SimilarityLevel::kLow,
                                                              SimilarityLevel::kMedium, SimilarityLevel::kHigh};

enum class Ordering { kBlueFirst, kRedFirst };
enum class Outcome { kGood, kBad, kInvalid };

std::string_view to_string(Condition c);
std::string_view to_string(SimilarityLevel s);
std::string_view to_string(Ordering o);
std::string_view to_string(Outcome o);
Condition parse_condition(std::string_view text);
SimilarityLevel parse_similarity(std::string_view text);
Ordering parse_ordering(std::string_view text);
Outcome parse_outcome(std::string_view text);

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 10.0;

struct RatingRecord {
  Condition condition = Condition::kA;
  std::string scenario;
  SimilarityLevel similarity = SimilarityLevel::kSafe;
  double threat = kMinRating;
  double warmth = kMinRating;

  void validate() const;
};

struct DecisionRecord {
  Condition condition = Condition::kA;
  Ordering ordering = Ordering::kBlueFirst;
  Outcome outcome = Outcome::kInvalid;
  std::optional<double> alpha;
};

// Columns: condition,scenario,similarity,threat,warmth
std::vector<RatingRecord> parse_ratings(const csv::Table& table);
// Columns: condition,ordering,outcome[,alpha]
std::vector<DecisionRecord> parse_decisions(const csv::Table& table);

struct ConditionMean {
  double threat = 0.0;  // NaN when n == 0
  double warmth = 0.0;
  std::size_t n = 0;
};

// Every condition has an entry; empty groups carry n = 0.
std::map<Condition, ConditionMean> condition_means(std::span<const RatingRecord> records,
                                                   std::optional<SimilarityLevel> level_filter = std::nullopt);

// Numeric code per similarity level, safe..high. Defaults to 0, 1, 2, 3.
struct SimilarityCoding {
  std::array<double, 4> values = {0.0, 1.0, 2.0, 3.0};

  double operator()(SimilarityLevel level) const { return values[static_cast<std::size_t>(level)]; }
  // "0,1,2,3"
  static SimilarityCoding parse(std::string_view text);
};

// Least-squares slope of y on x. Throws kDegenerate unless x takes at least
// two distinct values.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Slope of threat rating on coded similarity for one condition.
double ols_slope(std::span<const RatingRecord> records, Condition condition, const SimilarityCoding& coding = {});

enum class Sidedness { kGreater, kTwoSided };

// kResponse shuffles single ratings; kScenario moves every rating of one
// (scenario, condition) cell together.
enum class PermutationUnit { kResponse, kScenario };

struct PermutationOptions {
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  Sidedness sidedness = Sidedness::kGreater;
  PermutationUnit unit = PermutationUnit::kResponse;
  SimilarityCoding coding;
  unsigned workers = 1;
};

struct PermutationResult {
  double observed_diff = 0.0;  // slope(cond_y) - slope(cond_x)
  double p_value = 1.0;
  std::size_t extreme_count = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

// Condition labels are shuffled within each similarity level, so every
// permutation keeps the per-level group sizes of the observed design.
// p = (1 + #extreme) / (1 + iterations). Iteration i draws from its own
// counter-keyed stream, so the result does not depend on `workers`.
PermutationResult permutation_test_slope_diff(std::span<const RatingRecord> records, Condition cond_x,
                                              Condition cond_y, const PermutationOptions& options = {});

// Ties within this relative distance of the observed statistic count as
// extreme.
inline constexpr double kTieTolerance = 1e-9;

enum class Variance { kPooled, kUnpooled };

// z = (p1 - p2) / se. Throws kDegenerate when the standard error vanishes
// (pooled proportion of 0 or 1).
double two_proportion_z(std::size_t good1, std::size_t n1, std::size_t good2, std::size_t n2,
                        Variance variance = Variance::kPooled);

struct ProportionCell {
  std::size_t good = 0;
  std::size_t bad = 0;
  std::size_t invalid = 0;

  std::size_t valid() const { return good + bad; }
  // Percentage of valid outcomes that were good; NaN with no valid outcomes.
  double percent_good() const;
};

struct ProportionTable {
  std::map<std::pair<Condition, Ordering>, ProportionCell> by_ordering;
  std::map<Condition, ProportionCell> by_condition;
  std::size_t invalid_total = 0;
};

ProportionTable proportion_table(std::span<const DecisionRecord> records);

// Records without an alpha are ignored.
std::map<double, std::map<Condition, ProportionCell>> alpha_sweep(std::span<const DecisionRecord> records);

struct ZComparison {
  Condition first;
  Condition second;
  double z = 0.0;
  bool defined = true;  // false when the pooled proportion is 0 or 1
};

// C vs A, B vs A, BC vs A, BC vs B.
std::vector<ZComparison> standard_comparisons(const ProportionTable& table, Variance variance = Variance::kPooled);

}  // namespace emem::stats
