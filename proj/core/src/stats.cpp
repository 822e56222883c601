// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "emem/error.hpp"
#include "emem/numfmt.hpp"

namespace emem::stats {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// SplitMix64 keyed by (seed, stream): each permutation iteration owns an
// independent, reproducible stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return r % bound;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// A block of ratings that moves as one under permutation; x is constant within it.
struct Unit {
  double x = 0.0;
  double n = 0.0;
  double sum_y = 0.0;
};

struct Sums {
  double n = 0, sx = 0, sy = 0, sxy = 0, sxx = 0;

  void add(const Unit& u) {
    n += u.n;
    sx += u.n * u.x;
    sy += u.sum_y;
    sxy += u.x * u.sum_y;
    sxx += u.n * u.x * u.x;
  }

  double slope() const {
    const double denom = sxx - sx * sx / n;
    return (sxy - sx * sy / n) / denom;
  }
};

struct Stratum {
  std::vector<Unit> units;
  std::size_t y_count = 0;  // units labelled cond_y in the observed data
};

double permuted_diff(const std::vector<Stratum>& strata, std::uint64_t seed, std::uint64_t iteration,
                     std::vector<std::size_t>& scratch) {
  CounterRng rng(seed, iteration);
  Sums sx_group, sy_group;
  for (const auto& s : strata) {
    const std::size_t m = s.units.size();
    scratch.resize(m);
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
    // Partial Fisher-Yates: the first y_count slots become the cond_y draw.
    for (std::size_t i = 0; i < s.y_count; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
      std::swap(scratch[i], scratch[j]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      (i < s.y_count ? sy_group : sx_group).add(s.units[scratch[i]]);
    }
  }
  return sy_group.slope() - sx_group.slope();
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::kA: return "A";
    case Condition::kB: return "B";
    case Condition::kC: return "C";
    case Condition::kBC: return "BC";
  }
  return "?";
}

std::string_view to_string(SimilarityLevel s) {
  switch (s) {
    case SimilarityLevel::kSafe: return "safe";
    case SimilarityLevel::kLow: return "low";
    case SimilarityLevel::kMedium: return "medium";
    case SimilarityLevel::kHigh: return "high";
  }
  return "?";
}

std::string_view to_string(Ordering o) { return o == Ordering::kBlueFirst ? "blue_first" : "red_first"; }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kGood: return "good";
    case Outcome::kBad: return "bad";
    case Outcome::kInvalid: return "invalid";
  }
  return "?";
}

Condition parse_condition(std::string_view text) {
  const auto t = lower(text);
  if (t == "a") return Condition::kA;
  if (t == "b") return Condition::kB;
  if (t == "c") return Condition::kC;
  if (t == "bc") return Condition::kBC;
  fail(ErrorCode::kInvalidArgument, "unknown condition '" + std::string(text) + "'");
}

SimilarityLevel parse_similarity(std::string_view text) {
  const auto t = lower(text);
  for (auto level : kAllLevels) {
    if (t == to_string(level)) return level;
  }
  fail(ErrorCode::kInvalidArgument, "unknown similarity level '" + std::string(text) + "'");
}

Ordering parse_ordering(std::string_view text) {
  const auto t = lower(text);
  if (t == "blue_first") return Ordering::kBlueFirst;
  if (t == "red_first") return Ordering::kRedFirst;
  fail(ErrorCode::kInvalidArgument, "unknown ordering '" + std::string(text) + "'");
}

Outcome parse_outcome(std::string_view text) {
  const auto t = lower(text);
  if (t == "good") return Outcome::kGood;
  if (t == "bad") return Outcome::kBad;
  if (t == "invalid") return Outcome::kInvalid;
  fail(ErrorCode::kInvalidArgument, "unknown outcome '" + std::string(text) + "'");
}

void RatingRecord::validate() const {
  auto in_range = [](double v) { return v >= kMinRating && v <= kMaxRating; };
  if (!in_range(threat) || !in_range(warmth)) {
    fail(ErrorCode::kInvalidArgument, "ratings must lie in [1, 10] (scenario '" + scenario + "')");
  }
}

std::vector<RatingRecord> parse_ratings(const csv::Table& table) {
  const auto c_cond = table.require_column("condition");
  const auto c_scen = table.require_column("scenario");
  const auto c_sim = table.require_column("similarity");
  const auto c_threat = table.require_column("threat");
  const auto c_warmth = table.require_column("warmth");
  std::vector<RatingRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      RatingRecord rec{parse_condition(row[c_cond]), row[c_scen], parse_similarity(row[c_sim]),
                       parse_double(row[c_threat]), parse_double(row[c_warmth])};
      rec.validate();
      out.push_back(std::move(rec));
    } catch (const Error& e) {
      fail(e.code(), "ratings line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DecisionRecord> parse_decisions(const csv::Table& table) {
  const auto c_cond = table.require_column("condition");
  const auto c_ord = table.require_column("ordering");
  const auto c_out = table.require_column("outcome");
  const auto c_alpha = table.column("alpha");
  std::vector<DecisionRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      DecisionRecord rec{parse_condition(row[c_cond]), parse_ordering(row[c_ord]), parse_outcome(row[c_out]), {}};
      if (c_alpha && !row[*c_alpha].empty()) rec.alpha = parse_double(row[*c_alpha]);
      out.push_back(rec);
    } catch (const Error& e) {
      fail(e.code(), "decisions line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

std::map<Condition, ConditionMean> condition_means(std::span<const RatingRecord> records,
                                                   std::optional<SimilarityLevel> level_filter) {
  std::map<Condition, std::array<double, 3>> acc;
  for (auto c : kAllConditions) acc[c] = {0.0, 0.0, 0.0};
  for (const auto& r : records) {
    if (level_filter && r.similarity != *level_filter) continue;
    auto& a = acc[r.condition];
    a[0] += r.threat;
    a[1] += r.warmth;
    a[2] += 1.0;
  }
  std::map<Condition, ConditionMean> out;
  for (const auto& [c, a] : acc) {
    const auto n = static_cast<std::size_t>(a[2]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out[c] = n ? ConditionMean{a[0] / a[2], a[1] / a[2], n} : ConditionMean{nan, nan, 0};
  }
  return out;
}

SimilarityCoding SimilarityCoding::parse(std::string_view text) {
  SimilarityCoding coding;
  std::size_t k = 0;
  while (true) {
    auto comma = text.find(',');
    if (k == coding.values.size()) fail(ErrorCode::kInvalidArgument, "similarity coding needs exactly 4 values");
    coding.values[k++] = parse_double(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (k != coding.values.size()) fail(ErrorCode::kInvalidArgument, "similarity coding needs exactly 4 values");
  return coding;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kDimensionMismatch, "x and y differ in length");
  if (x.empty()) fail(ErrorCode::kDegenerate, "no observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::kDegenerate, "x has fewer than two distinct values");
  return sxy / sxx;
}

double ols_slope(std::span<const RatingRecord> records, Condition condition, const SimilarityCoding& coding) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    if (r.condition != condition) continue;
    x.push_back(coding(r.similarity));
    y.push_back(r.threat);
  }
  try {
    return ols_slope(x, y);
  } catch (const Error& e) {
    fail(e.code(), "condition " + std::string(to_string(condition)) + ": " + e.what());
  }
}

PermutationResult permutation_test_slope_diff(std::span<const RatingRecord> records, Condition cond_x,
                                              Condition cond_y, const PermutationOptions& options) {
  if (cond_x == cond_y) fail(ErrorCode::kInvalidArgument, "permutation test needs two different conditions");
  if (options.iterations == 0) fail(ErrorCode::kInvalidArgument, "iterations must be positive");

  // Build units: one per rating, or one per (level, scenario, condition).
  struct Key {
    SimilarityLevel level;
    std::string scenario;
    bool is_y;
    std::size_t ordinal;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, Unit> units;
  std::size_t ordinal = 0;
  std::set<double> x_levels_x, x_levels_y;
  for (const auto& r : records) {
    if (r.condition != cond_x && r.condition != cond_y) continue;
    const bool is_y = r.condition == cond_y;
    const double x = options.coding(r.similarity);
    (is_y ? x_levels_y : x_levels_x).insert(x);
    Key key{r.similarity, options.unit == PermutationUnit::kScenario ? r.scenario : std::string(), is_y,
            options.unit == PermutationUnit::kResponse ? ordinal++ : 0};
    auto& u = units[key];
    u.x = x;
    u.n += 1.0;
    u.sum_y += r.threat;
  }
  if (x_levels_x.size() < 2 || x_levels_y.size() < 2) {
    fail(ErrorCode::kDegenerate, "each condition needs ratings at two or more similarity levels");
  }

  std::map<SimilarityLevel, Stratum> by_level;
  Sums obs_x, obs_y;
  for (const auto& [key, u] : units) {
    auto& s = by_level[key.level];
    s.units.push_back(u);
    if (key.is_y) {
      ++s.y_count;
      obs_y.add(u);
    } else {
      obs_x.add(u);
    }
  }
  // Units within a level are exchangeable under the null, so a canonical order
  // makes a seeded run independent of input record order.
  std::vector<Stratum> strata;
  for (auto& [level, s] : by_level) {
    std::sort(s.units.begin(), s.units.end(), [](const Unit& a, const Unit& b) {
      return std::tie(a.n, a.sum_y) < std::tie(b.n, b.sum_y);
    });
    strata.push_back(std::move(s));
  }

  PermutationResult result;
  result.observed_diff = obs_y.slope() - obs_x.slope();
  result.iterations = options.iterations;
  result.seed = options.seed;

  const double obs = result.observed_diff;
  const double tol = kTieTolerance * std::max(1.0, std::abs(obs));
  auto extreme = [&](double d) {
    return options.sidedness == Sidedness::kGreater ? d >= obs - tol : std::abs(d) >= std::abs(obs) - tol;
  };

  const unsigned workers = std::max(1u, options.workers);
  std::vector<std::size_t> counts(workers, 0);
  auto run = [&](unsigned w) {
    std::vector<std::size_t> scratch;
    for (std::size_t it = w; it < options.iterations; it += workers) {
      if (extreme(permuted_diff(strata, options.seed, it, scratch))) ++counts[w];
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  result.extreme_count = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  result.p_value = double(1 + result.extreme_count) / double(1 + options.iterations);
  return result;
}

double two_proportion_z(std::size_t good1, std::size_t n1, std::size_t good2, std::size_t n2, Variance variance) {
  if (n1 == 0 || n2 == 0) fail(ErrorCode::kInvalidArgument, "group sizes must be positive");
  if (good1 > n1 || good2 > n2) fail(ErrorCode::kInvalidArgument, "good count exceeds group size");
  const double p1 = double(good1) / double(n1);
  const double p2 = double(good2) / double(n2);
  double se = 0.0;
  if (variance == Variance::kPooled) {
    const double pooled = double(good1 + good2) / double(n1 + n2);
    se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / double(n1) + 1.0 / double(n2)));
  } else {
    se = std::sqrt(p1 * (1.0 - p1) / double(n1) + p2 * (1.0 - p2) / double(n2));
  }
  if (!(se > 0.0)) fail(ErrorCode::kDegenerate, "z undefined: standard error is zero");
  return (p1 - p2) / se;
}

double ProportionCell::percent_good() const {
  return valid() ? 100.0 * double(good) / double(valid()) : std::numeric_limits<double>::quiet_NaN();
}

namespace {
void tally(ProportionCell& cell, Outcome o) {
  switch (o) {
    case Outcome::kGood: ++cell.good; break;
    case Outcome::kBad: ++cell.bad; break;
    case Outcome::kInvalid: ++cell.invalid; break;
  }
}
}  // namespace

ProportionTable proportion_table(std::span<const DecisionRecord> records) {
  ProportionTable t;
  for (const auto& r : records) {
    tally(t.by_ordering[{r.condition, r.ordering}], r.outcome);
    tally(t.by_condition[r.condition], r.outcome);
    if (r.outcome == Outcome::kInvalid) ++t.invalid_total;
  }
  return t;
}

std::map<double, std::map<Condition, ProportionCell>> alpha_sweep(std::span<const DecisionRecord> records) {
  std::map<double, std::map<Condition, ProportionCell>> out;
  for (const auto& r : records) {
    if (r.alpha) tally(out[*r.alpha][r.condition], r.outcome);
  }
  return out;
}

std::vector<ZComparison> standard_comparisons(const ProportionTable& table, Variance variance) {
  static constexpr std::pair<Condition, Condition> kPairs[] = {{Condition::kC, Condition::kA},
                                                               {Condition::kB, Condition::kA},
                                                               {Condition::kBC, Condition::kA},
                                                               {Condition::kBC, Condition::kB}};
  std::vector<ZComparison> out;
  for (auto [first, second] : kPairs) {
    auto a = table.by_condition.find(first);
    auto b = table.by_condition.find(second);
    if (a == table.by_condition.end() || b == table.by_condition.end()) continue;
    if (!a->second.valid() || !b->second.valid()) continue;
    ZComparison cmp{first, second, std::numeric_limits<double>::quiet_NaN(), false};
    try {
      cmp.z = two_proportion_z(a->second.good, a->second.valid(), b->second.good, b->second.valid(), variance);
      cmp.defined = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
    }
    out.push_back(cmp);
  }
  return out;
}

}  // namespace emem::stats
