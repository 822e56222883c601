// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/sae.hpp"

#include "emem/error.hpp"

namespace emem {

void SaeWeights::validate() const {
  auto check = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
      fail(ErrorCode::kDimensionMismatch, std::string(what) + " has " + std::to_string(got) +
                                              " values, expected " + std::to_string(want));
    }
  };
  if (d_model == 0 || n_features == 0) fail(ErrorCode::kDimensionMismatch, "SAE dims must be positive");
  check(encoder_matrix.size(), d_model * n_features, "encoder matrix");
  check(encoder_bias.size(), n_features, "encoder bias");
  check(thresholds.size(), n_features, "thresholds");
  check(decoder_matrix.size(), n_features * d_model, "decoder matrix");
  check(decoder_bias.size(), d_model, "decoder bias");
}

SaeWeights SaeWeights::zeros(std::size_t d_model, std::size_t n_features) {
  SaeWeights s;
  s.d_model = d_model;
  s.n_features = n_features;
  s.encoder_matrix.assign(d_model * n_features, 0.0f);
  s.encoder_bias.assign(n_features, 0.0f);
  s.thresholds.assign(n_features, 0.0f);
  s.decoder_matrix.assign(n_features * d_model, 0.0f);
  s.decoder_bias.assign(d_model, 0.0f);
  return s;
}

namespace sae {

FeatureVector encode(std::span<const float> residual, const SaeWeights& sae, std::string source_label) {
  if (residual.size() != sae.d_model) {
    fail(ErrorCode::kDimensionMismatch, "residual has " + std::to_string(residual.size()) +
                                            " values, SAE expects d_model=" + std::to_string(sae.d_model));
  }
  const std::size_t n = sae.n_features;
  std::vector<double> z(sae.encoder_bias.begin(), sae.encoder_bias.end());
  // Row-major W_enc: walking rows keeps the inner loop contiguous.
  for (std::size_t k = 0; k < sae.d_model; ++k) {
    const double r = residual[k];
    if (r == 0.0) continue;
    const float* row = sae.encoder_matrix.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) z[i] += r * row[i];
  }
  FeatureVector out{std::vector<float>(n, 0.0f), std::move(source_label)};
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] > sae.thresholds[i]) out.values[i] = static_cast<float>(z[i]);
  }
  return out;
}

FeatureVector encode(const ActivationSnapshot& snapshot, const SaeWeights& sae) {
  return encode(snapshot.residual, sae, snapshot.label);
}

std::vector<FeatureVector> encode_batch(std::span<const ActivationSnapshot> snapshots, const SaeWeights& sae) {
  std::vector<FeatureVector> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(encode(s, sae));
  return out;
}

std::vector<double> decode(std::span<const float> features, const SaeWeights& sae, DecoderBias bias) {
  if (features.size() != sae.n_features) {
    fail(ErrorCode::kDimensionMismatch, "feature vector has " + std::to_string(features.size()) +
                                            " values, SAE expects n_features=" + std::to_string(sae.n_features));
  }
  std::vector<double> out(sae.d_model, 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double f = features[i];
    if (f == 0.0) continue;
    auto row = sae.decoder_row(static_cast<FeatureIndex>(i));
    for (std::size_t j = 0; j < sae.d_model; ++j) out[j] += f * row[j];
  }
  if (bias == DecoderBias::kInclude) {
    for (std::size_t j = 0; j < sae.d_model; ++j) out[j] += sae.decoder_bias[j];
  }
  return out;
}

}  // namespace sae
}  // namespace emem
