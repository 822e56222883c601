// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <numeric>

#include "emem/echo.hpp"
#include "fixtures.hpp"

namespace {

using namespace emem;

void BM_DistinctiveFeatures(benchmark::State& state) {
  constexpr std::size_t n = 16384;
  auto f = fixtures::random_features(n, 1);
  auto mean = fixtures::random_features(n, 2);
  const auto k = std::size_t(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(echo::distinctive_features(f, mean, k));
}
BENCHMARK(BM_DistinctiveFeatures)->Arg(50)->Arg(1000);

void BM_ReconstructEcho(benchmark::State& state) {
  auto sae = fixtures::random_sae(1152, 16384, 9);
  auto f = fixtures::random_features(16384, 1);
  std::vector<FeatureIndex> idx(std::size_t(state.range(0)));
  std::iota(idx.begin(), idx.end(), FeatureIndex{0});
  for (auto _ : state) benchmark::DoNotOptimize(echo::reconstruct_echo(f, idx, sae));
}
BENCHMARK(BM_ReconstructEcho)->Arg(50)->Unit(benchmark::kMicrosecond);

}  // namespace
