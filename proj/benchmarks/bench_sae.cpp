// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "emem/sae.hpp"
#include "fixtures.hpp"

namespace {

using namespace emem;

void BM_Encode(benchmark::State& state) {
  const auto d = std::size_t(state.range(0)), n = std::size_t(state.range(1));
  auto sae = fixtures::random_sae(d, n, 3);
  auto r = fixtures::random_vector(d, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sae::encode(r, sae));
}
BENCHMARK(BM_Encode)->Args({256, 2048})->Args({1152, 16384})->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state) {
  const auto d = std::size_t(state.range(0)), n = std::size_t(state.range(1));
  auto sae = fixtures::random_sae(d, n, 3);
  auto f = fixtures::random_features(n, 5, 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(sae::decode(f.values, sae, sae::DecoderBias::kInclude));
}
BENCHMARK(BM_Decode)->Args({1152, 16384})->Unit(benchmark::kMillisecond);

}  // namespace
