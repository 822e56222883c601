// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded synthetic data for tests and the acceptance suite.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "emem/discovery.hpp"
#include "emem/types.hpp"

namespace emem::fixtures {

inline SaeWeights random_sae(std::size_t d_model, std::size_t n_features, std::uint64_t seed,
                             float threshold_max = 0.5f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::uniform_real_distribution<float> u(0.0f, threshold_max);
  SaeWeights s = SaeWeights::zeros(d_model, n_features);
  for (auto& w : s.encoder_matrix) w = g(rng) / std::sqrt(float(d_model));
  for (auto& b : s.encoder_bias) b = 0.1f * g(rng);
  for (auto& t : s.thresholds) t = u(rng);
  for (auto& w : s.decoder_matrix) w = g(rng) / std::sqrt(float(d_model));
  for (auto& b : s.decoder_bias) b = 0.1f * g(rng);
  return s;
}

// d_model == n_features, W_enc = W_dec = I, zero biases and thresholds, so
// encode(r) = max(r, 0) elementwise.
inline SaeWeights identity_sae(std::size_t n) {
  SaeWeights s = SaeWeights::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.encoder_matrix[i * n + i] = 1.0f;
    s.decoder_matrix[i * n + i] = 1.0f;
  }
  return s;
}

inline std::vector<float> random_vector(std::size_t n, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, scale);
  std::vector<float> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Non-negative, mostly-zero vector resembling JumpReLU output.
inline FeatureVector random_features(std::size_t n, std::uint64_t seed, double density = 0.2,
                                     std::string label = {}) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  std::exponential_distribution<float> mag(0.5f);
  FeatureVector f{std::vector<float>(n, 0.0f), std::move(label)};
  for (auto& x : f.values) {
    if (on(rng)) x = mag(rng);
  }
  return f;
}

inline std::vector<FeatureIndex> sample_indices(std::mt19937_64& rng, std::vector<FeatureIndex>& pool,
                                                std::size_t k) {
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<FeatureIndex> out(pool.end() - static_cast<std::ptrdiff_t>(k), pool.end());
  pool.resize(pool.size() - k);
  return out;
}

// Twenty contexts in early-layer feature space dominated by a shared set of
// large always-on features. Each context also carries a small planted set of
// weak features. Queries re-draw all noise and keep 80% of the planted set.
struct ContextFixture {
  std::size_t n_features = 0;
  std::vector<FeatureVector> memories;
  std::vector<FeatureVector> queries;  // queries[i] should retrieve memories[i]
  std::vector<float> reference_mean;   // mean over the memory contexts
};

inline ContextFixture make_context_fixture(std::uint64_t seed, std::size_t n_features = 2048,
                                           std::size_t contexts = 20) {
  constexpr std::size_t kBaseline = 150, kPlanted = 40, kSparseNoise = 10;
  std::mt19937_64 rng(seed);
  std::vector<FeatureIndex> pool(n_features);
  std::iota(pool.begin(), pool.end(), FeatureIndex{0});
  const auto baseline = sample_indices(rng, pool, kBaseline);
  std::uniform_real_distribution<float> base_level(60.0f, 80.0f), planted_level(1.5f, 3.0f), weak(0.2f, 1.0f);
  std::normal_distribution<float> jitter(0.0f, 0.5f);
  std::vector<float> base_value(kBaseline);
  for (auto& b : base_value) b = base_level(rng);

  std::vector<std::vector<FeatureIndex>> planted;
  for (std::size_t c = 0; c < contexts; ++c) planted.push_back(sample_indices(rng, pool, kPlanted));
  const std::vector<FeatureIndex> free_pool = pool;

  auto draw = [&](std::size_t c, bool is_query) {
    FeatureVector f{std::vector<float>(n_features, 0.0f), (is_query ? "query/" : "memory/") + std::to_string(c)};
    for (std::size_t b = 0; b < kBaseline; ++b) f.values[baseline[b]] = base_value[b] + jitter(rng);
    std::bernoulli_distribution keep(is_query ? 0.8 : 1.0);
    for (auto i : planted[c]) {
      if (keep(rng)) f.values[i] = planted_level(rng);
    }
    std::uniform_int_distribution<std::size_t> pick(0, free_pool.size() - 1);
    for (std::size_t k = 0; k < kSparseNoise; ++k) f.values[free_pool[pick(rng)]] = weak(rng);
    return f;
  };

  ContextFixture fx;
  fx.n_features = n_features;
  for (std::size_t c = 0; c < contexts; ++c) fx.memories.push_back(draw(c, false));
  for (std::size_t c = 0; c < contexts; ++c) fx.queries.push_back(draw(c, true));
  fx.reference_mean.assign(n_features, 0.0f);
  for (std::size_t i = 0; i < n_features; ++i) {
    double s = 0.0;
    for (const auto& m : fx.memories) s += m.values[i];
    fx.reference_mean[i] = static_cast<float>(s / double(contexts));
  }
  return fx;
}

// Three threat and three safe contexts in residual space for an identity
// SAE. Threat contexts share a "warehouse" feature block, safe contexts a
// "marketplace" block; each adds its own block. A constant baseline sits on
// every context and in the reference corpus, so it never sets a bit.
struct SixMemoryFixture {
  static constexpr std::size_t kWidth = 256;
  std::vector<ActivationSnapshot> contexts;   // threat/0..2 then safe/0..2
  std::vector<ActivationSnapshot> reference;  // the six contexts plus four neutral ones
  ActivationSnapshot medium_query;            // half the warehouse block plus its own block
  std::vector<FeatureIndex> warehouse, market;
};

inline SixMemoryFixture make_six_memory_fixture() {
  constexpr std::size_t n = SixMemoryFixture::kWidth;
  auto range = [](FeatureIndex lo, FeatureIndex hi) {
    std::vector<FeatureIndex> v(hi - lo);
    std::iota(v.begin(), v.end(), lo);
    return v;
  };
  SixMemoryFixture fx;
  const auto baseline = range(0, 40);
  fx.warehouse = range(40, 70);
  fx.market = range(70, 100);
  auto make = [&](std::string label, const std::vector<FeatureIndex>& shared, FeatureIndex own_lo) {
    ActivationSnapshot s{kContextLayer, std::vector<float>(n, 0.0f), std::move(label), 12};
    for (auto i : baseline) s.residual[i] = 20.0f;
    for (auto i : shared) s.residual[i] = 3.0f;
    for (auto i : range(own_lo, own_lo + 10)) s.residual[i] = 2.0f;
    return s;
  };
  for (int k = 0; k < 3; ++k) fx.contexts.push_back(make("threat/" + std::to_string(k), fx.warehouse, FeatureIndex(100 + 10 * k)));
  for (int k = 0; k < 3; ++k) fx.contexts.push_back(make("safe/" + std::to_string(k), fx.market, FeatureIndex(130 + 10 * k)));
  fx.reference = fx.contexts;
  for (int k = 0; k < 4; ++k) fx.reference.push_back(make("neutral/" + std::to_string(k), {}, FeatureIndex(160 + 10 * k)));

  fx.medium_query = make("query/medium", {}, 200);
  for (std::size_t k = 0; k < fx.warehouse.size(); k += 2) fx.medium_query.residual[fx.warehouse[k]] = 2.5f;
  return fx;
}

// Probe corpus with about 5% planted exclusive features: one emotional text
// fires above 5.5 while every neutral text stays below 0.99. Decoys fire on an
// emotion and reach 1.0 or more on one neutral text.
inline discovery::ProbeCorpus planted_corpus(std::size_t n, std::uint64_t seed, std::vector<FeatureIndex>* planted = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> low(0.0f, 0.99f), mid(0.0f, 4.9f), high(5.5f, 9.0f);
  discovery::ProbeCorpus c;
  const char* names[] = {"fear", "joy", "love", "anger", "hope", "awe", "grief", "betrayal"};
  for (auto* name : names) c.emotional.push_back({name, {std::vector<float>(n), name}});
  for (int k = 0; k < 8; ++k) c.neutral.push_back({std::vector<float>(n), "neutral/" + std::to_string(k)});
  std::bernoulli_distribution plant(0.05), noisy_neutral(0.3);
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = plant(rng);
    if (p && planted) planted->push_back(static_cast<FeatureIndex>(i));
    for (auto& e : c.emotional) e.features.values[i] = mid(rng);
    if (p) c.emotional[rng() % 8].features.values[i] = high(rng);
    for (auto& v : c.neutral) v.values[i] = low(rng);
    // Decoys: fire on emotion and on a neutral text too.
    if (!p && noisy_neutral(rng)) {
      c.emotional[rng() % 8].features.values[i] = high(rng);
      c.neutral[rng() % 8].values[i] = 1.0f + low(rng);
    }
  }
  return c;
}

}  // namespace emem::fixtures
