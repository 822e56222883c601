// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/echo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "emem/error.hpp"
#include "emem/sae.hpp"
#include "emem/tensorio.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace emem::echo {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

FeatureVector fv(std::vector<float> v) { return {std::move(v), ""}; }

TEST(Distinctive, EqualToMeanFallsBackToLowestIndices) {
  auto f = fixtures::random_features(30, 1);
  auto got = distinctive_features(f, f, 7);
  std::vector<FeatureIndex> want(7);
  std::iota(want.begin(), want.end(), FeatureIndex{0});
  EXPECT_EQ(got, want);
}

TEST(Distinctive, OrdersByAbsoluteDeviation) {
  auto got = distinctive_features(fv({0, 5, -7, 1}), fv({0, 0, 0, 0}), 2);
  EXPECT_EQ(got, (std::vector<FeatureIndex>{2, 1}));
}

TEST(Distinctive, TiesGoToLowerIndex) {
  auto got = distinctive_features(fv({1, -3, 3, 0, 3}), fv({0, 0, 0, 0, 0}), 2);
  EXPECT_EQ(got, (std::vector<FeatureIndex>{1, 2}));
}

TEST(Distinctive, MatchesFullSortOracle) {
  for (std::size_t k : {1u, 50u, 999u, 1000u}) {
    auto f = fixtures::random_features(1000, k, 0.3);
    auto m = fixtures::random_features(1000, k + 1, 0.3);
    EXPECT_EQ(distinctive_features(f, m, k), oracle::full_sort_topk(f, m, k)) << k;
  }
}

TEST(Distinctive, ScaleCovariant) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = fixtures::random_features(200, rng());
    auto m = fixtures::random_features(200, rng());
    const float c = trial % 2 ? 4.0f : 0.5f;  // powers of two keep float scaling exact
    FeatureVector fc = f, mc = m;
    for (auto& x : fc.values) x *= c;
    for (auto& x : mc.values) x *= c;
    EXPECT_EQ(distinctive_features(fc, mc, 25), distinctive_features(f, m, 25));
  }
}

TEST(Distinctive, Errors) {
  auto f = fv({1, 2, 3});
  EXPECT_THROW(distinctive_features(f, f, 0), Error);
  EXPECT_THROW(distinctive_features(f, f, 4), Error);
  EXPECT_THROW(distinctive_features(f, fv({1, 2}), 1), Error);
}

TEST(Reconstruct, EmptySetGivesZeroDelta) {
  auto s = fixtures::random_sae(8, 32, 1);
  auto e = reconstruct_echo(fixtures::random_features(32, 2), {}, s, "m1");
  EXPECT_EQ(e.delta, std::vector<float>(8, 0.0f));
  EXPECT_EQ(e.source_memory, "m1");
}

TEST(Reconstruct, FullSetEqualsDecodeAndBiasCompletesIt) {
  auto s = fixtures::random_sae(16, 64, 3);
  auto f = fixtures::random_features(64, 4, 0.5);
  std::vector<FeatureIndex> all(64);
  std::iota(all.begin(), all.end(), FeatureIndex{0});
  auto e = reconstruct_echo(f, all, s);
  auto plain = sae::decode(f, s, sae::DecoderBias::kExclude);
  auto biased = sae::decode(f, s, sae::DecoderBias::kInclude);
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_NEAR(e.delta[j], plain[j], 1e-6 * (1 + std::fabs(plain[j])));
    EXPECT_NEAR(double(e.delta[j]) + s.decoder_bias[j], biased[j], 1e-6 * (1 + std::fabs(biased[j])));
  }
}

TEST(Reconstruct, MatchesMaskedOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = fixtures::random_sae(32, 256, rng());
    auto f = fixtures::random_features(256, rng(), 0.4);
    auto m = fixtures::random_features(256, rng(), 0.4);
    auto idx = distinctive_features(f, m, 50);
    auto e = reconstruct_echo(f, idx, s);
    EXPECT_EQ(e.source_indices, idx);
    auto want = oracle::masked_decode(f.values, idx, s);
    for (std::size_t j = 0; j < 32; ++j) EXPECT_NEAR(e.delta[j], want[j], 1e-6 * std::max(1.0, std::fabs(want[j])));
  }
}

TEST(Reconstruct, RejectsBadIndices) {
  auto s = fixtures::random_sae(4, 8, 1);
  auto f = fixtures::random_features(8, 1);
  std::vector<FeatureIndex> out_of_range{8}, repeated{1, 1};
  EXPECT_THROW(reconstruct_echo(f, out_of_range, s), Error);
  EXPECT_THROW(reconstruct_echo(f, repeated, s), Error);
  EXPECT_THROW(reconstruct_echo(fixtures::random_features(7, 1), {}, s), Error);
}

TEST(Injection, ZeroAlphaGivesZero) {
  EchoVector e{{1.0f, -2.0f}, {}, ""};
  EXPECT_EQ(injection_delta(e, 0.0, 10.0), (std::vector<double>{0.0, 0.0}));
}

TEST(Injection, ThreeFourFive) {
  EchoVector e{{3.0f, 4.0f}, {}, ""};
  auto d = injection_delta(e, 0.5, 10.0);
  EXPECT_NEAR(d[0], 3.0, 1e-12);
  EXPECT_NEAR(d[1], 4.0, 1e-12);
}

TEST(Injection, NormLawHoldsTightly) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> alpha(0.001, 1.0), m(0.1, 500.0);
  for (int trial = 0; trial < 100; ++trial) {
    EchoVector e{fixtures::random_vector(1152, rng(), 0.01f), {}, ""};
    const double a = alpha(rng), r = m(rng);
    auto d = injection_delta(e, a, r);
    EXPECT_NEAR(norm(d) / r, a, 1e-9);
    // Direction preserved: positive multiple of the delta.
    const double ratio = d[0] / e.delta[0];
    EXPECT_GT(ratio, 0.0);
    for (std::size_t j = 1; j < 1152; j += 97) EXPECT_NEAR(d[j], ratio * e.delta[j], 1e-9 * (1 + std::fabs(d[j])));
  }
}

TEST(Injection, Errors) {
  EchoVector zero{{0.0f, 0.0f}, {}, "m"};
  try {
    injection_delta(zero, 0.1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  EchoVector e{{1.0f}, {}, ""};
  EXPECT_THROW(injection_delta(e, -0.1, 1.0), Error);
  EXPECT_THROW(injection_delta(e, 0.1, 0.0), Error);
}

TEST(Apply, ElementwiseSum) {
  std::vector<float> r{1.0f, 1.0f};
  std::vector<double> d{0.5, -0.5};
  EXPECT_EQ(apply_injection(r, d), (std::vector<double>{1.5, 0.5}));
  std::vector<double> zero(2, 0.0);
  EXPECT_EQ(apply_injection(r, zero), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(apply_injection(r, std::vector<double>{1.0}), Error);

  auto big = fixtures::random_vector(1152, 5);
  auto delta_f = fixtures::random_vector(1152, 6);
  std::vector<double> delta(delta_f.begin(), delta_f.end());
  auto sum = apply_injection(big, delta);
  for (std::size_t j = 0; j < 1152; ++j) EXPECT_EQ(sum[j], double(big[j]) + delta[j]);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW((EchoConfig{50, 0.05}.validate(100)));
  EXPECT_THROW((EchoConfig{0, 0.05}.validate(100)), Error);
  EXPECT_THROW((EchoConfig{101, 0.05}.validate(100)), Error);
  EXPECT_THROW((EchoConfig{5, 1.5}.validate(100)), Error);
  EXPECT_THROW((EchoConfig{5, -0.1}.validate(100)), Error);
}

TEST(Build, UsesMeanOverConditioningSet) {
  auto s = fixtures::random_sae(8, 40, 2);
  std::vector<FeatureVector> set;
  for (int k = 0; k < 4; ++k) set.push_back(fixtures::random_features(40, 20 + k, 0.4, "exp/" + std::to_string(k)));
  auto echoes = build_echoes(set, s, {5, 0.2});
  ASSERT_EQ(echoes.size(), 4u);
  FeatureVector mean{oracle::naive_mean(set), ""};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(echoes[k].source_indices, oracle::full_sort_topk(set[k], mean, 5));
    EXPECT_EQ(echoes[k].source_memory, set[k].source_label);
  }
}

TEST(Container, EchoRoundTrip) {
  auto s = fixtures::random_sae(8, 40, 2);
  std::vector<FeatureVector> set;
  for (int k = 0; k < 3; ++k) set.push_back(fixtures::random_features(40, 50 + k, 0.4, "e" + std::to_string(k)));
  auto echoes = build_echoes(set, s, {6, 0.2});
  tensorio::ContainerBuilder b;
  for (const auto& e : echoes) add_echo(b, e);
  auto back = echoes_from_container(tensorio::read_container_bytes(b.bytes()));
  ASSERT_EQ(back.size(), echoes.size());
  for (const auto& e : echoes) EXPECT_NE(std::find(back.begin(), back.end(), e), back.end());
}

}  // namespace
}  // namespace emem::echo
