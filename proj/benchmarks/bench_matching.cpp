// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "emem/matching.hpp"
#include "fixtures.hpp"

namespace {

using namespace emem;

matching::BinarySignature signature(std::size_t n, std::uint64_t seed) {
  auto f = fixtures::random_features(n, seed, 0.1);
  std::vector<float> mean(n, 0.5f);
  return matching::binarize(f.values, mean);
}

void BM_Bdn(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  auto a = signature(n, 1), b = signature(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matching::bdn(a, b));
}
BENCHMARK(BM_Bdn)->Arg(2048)->Arg(16384);

void BM_BestMatch(benchmark::State& state) {
  constexpr std::size_t n = 16384;
  const auto count = std::size_t(state.range(0));
  std::vector<matching::BinarySignature> sigs;
  for (std::size_t i = 0; i < count; ++i) sigs.push_back(signature(n, 100 + i));
  std::vector<matching::SignatureRef> refs;
  for (std::size_t i = 0; i < count; ++i) refs.push_back({std::to_string(i), &sigs[i]});
  auto q = signature(n, 7);
  for (auto _ : state) benchmark::DoNotOptimize(matching::best_match(q, refs));
  state.SetItemsProcessed(state.iterations() * std::int64_t(count));
}
BENCHMARK(BM_BestMatch)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
