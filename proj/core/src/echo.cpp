// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/echo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emem/discovery.hpp"
#include "emem/error.hpp"
#include "emem/sae.hpp"

namespace emem::echo {

void EchoConfig::validate(std::size_t n_features) const {
  if (k == 0 || k > n_features) {
    fail(ErrorCode::kInvalidArgument, "k=" + std::to_string(k) + " outside [1, " + std::to_string(n_features) + "]");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "alpha=" + std::to_string(alpha) + " outside [0, 1]");
  }
}

std::vector<FeatureIndex> distinctive_features(const FeatureVector& f, const FeatureVector& mean, std::size_t k) {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be positive");
  if (f.size() != mean.size()) fail(ErrorCode::kDimensionMismatch, "feature vector and mean differ in length");
  if (k > f.size()) {
    fail(ErrorCode::kInvalidArgument, "k=" + std::to_string(k) + " exceeds " + std::to_string(f.size()) + " features");
  }
  std::vector<double> dev(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    dev[i] = std::abs(double(f.values[i]) - double(mean.values[i]));
  }
  std::vector<FeatureIndex> order(f.size());
  std::iota(order.begin(), order.end(), FeatureIndex{0});
  auto before = [&](FeatureIndex a, FeatureIndex b) { return dev[a] > dev[b] || (dev[a] == dev[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  order.resize(k);
  return order;
}

EchoVector reconstruct_echo(const FeatureVector& f, std::span<const FeatureIndex> indices, const SaeWeights& sae,
                            std::string source_memory) {
  if (f.size() != sae.n_features) fail(ErrorCode::kDimensionMismatch, "feature vector does not match SAE width");
  std::vector<double> acc(sae.d_model, 0.0);
  std::vector<bool> seen(sae.n_features, false);
  for (auto i : indices) {
    if (i >= sae.n_features) fail(ErrorCode::kInvalidArgument, "feature index " + std::to_string(i) + " out of range");
    if (seen[i]) fail(ErrorCode::kInvalidArgument, "feature index " + std::to_string(i) + " repeated");
    seen[i] = true;
    const double a = f.values[i];
    if (a == 0.0) continue;
    auto row = sae.decoder_row(i);
    for (std::size_t j = 0; j < sae.d_model; ++j) acc[j] += a * row[j];
  }
  EchoVector e;
  e.delta.resize(sae.d_model);
  for (std::size_t j = 0; j < sae.d_model; ++j) e.delta[j] = static_cast<float>(acc[j]);
  e.source_indices.assign(indices.begin(), indices.end());
  e.source_memory = std::move(source_memory);
  return e;
}

std::vector<double> injection_delta(const EchoVector& echo, double alpha, double mean_residual_norm) {
  if (!(alpha >= 0.0)) fail(ErrorCode::kInvalidArgument, "alpha must be non-negative");
  if (!(mean_residual_norm > 0.0)) fail(ErrorCode::kInvalidArgument, "mean residual norm must be positive");
  double sq = 0.0;
  for (float x : echo.delta) sq += double(x) * double(x);
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) fail(ErrorCode::kDegenerate, "echo '" + echo.source_memory + "' has zero norm");
  const double scale = alpha * mean_residual_norm / norm;
  std::vector<double> out(echo.delta.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = scale * double(echo.delta[j]);
  return out;
}

std::vector<double> apply_injection(std::span<const float> residual, std::span<const double> scaled_delta) {
  if (residual.size() != scaled_delta.size()) {
    fail(ErrorCode::kDimensionMismatch, "residual and delta differ in length");
  }
  std::vector<double> out(residual.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = double(residual[j]) + scaled_delta[j];
  return out;
}

std::vector<EchoVector> build_echoes(std::span<const FeatureVector> conditioning, const SaeWeights& sae,
                                     const EchoConfig& config) {
  config.validate(sae.n_features);
  const FeatureVector mean = discovery::mean_profile(conditioning);
  std::vector<EchoVector> out;
  out.reserve(conditioning.size());
  for (const auto& f : conditioning) {
    auto s = distinctive_features(f, mean, config.k);
    out.push_back(reconstruct_echo(f, s, sae, f.source_label));
  }
  return out;
}

void add_echo(tensorio::ContainerBuilder& builder, const EchoVector& echo) {
  std::vector<float> idx(echo.source_indices.begin(), echo.source_indices.end());
  builder.add("echo/" + echo.source_memory + "/delta", echo.delta);
  if (!idx.empty()) builder.add("echo/" + echo.source_memory + "/source_indices", idx);
}

std::vector<EchoVector> echoes_from_container(const tensorio::Container& c) {
  constexpr std::string_view kPrefix = "echo/";
  constexpr std::string_view kSuffix = "/delta";
  std::vector<EchoVector> out;
  for (const auto& entry : c.manifest.entries) {
    std::string_view name = entry.name;
    if (!name.starts_with(kPrefix) || !name.ends_with(kSuffix)) continue;
    std::string id(name.substr(kPrefix.size(), name.size() - kPrefix.size() - kSuffix.size()));
    EchoVector e;
    e.delta = c.at(entry.name).values;
    e.source_memory = id;
    if (const auto* idx = c.find("echo/" + id + "/source_indices")) {
      for (float v : idx->values) e.source_indices.push_back(static_cast<FeatureIndex>(v));
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace emem::echo
