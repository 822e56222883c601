// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emem {

using FeatureIndex = std::uint32_t;
using Layer = int;

// Residual-stream width and SAE dictionary size of the studied model.
inline constexpr std::size_t kDefaultDModel = 1152;
inline constexpr std::size_t kDefaultFeatures = 16384;

// Context signatures are read at the early layer, emotion content at the
// late one.
inline constexpr Layer kContextLayer = 7;
inline constexpr Layer kEmotionLayer = 22;
inline constexpr Layer kSaeLayers[] = {7, 13, 17, 22};

// SAE activations for one context. Entries are non-negative when produced by
// a JumpReLU encoder with non-negative thresholds.
struct FeatureVector {
  std::vector<float> values;
  std::string source_label;

  std::size_t size() const { return values.size(); }
  float operator[](std::size_t i) const { return values[i]; }

  bool operator==(const FeatureVector&) const = default;
};

// One residual vector, already reduced over token positions.
struct ActivationSnapshot {
  Layer layer = kEmotionLayer;
  std::vector<float> residual;
  std::string label;
  std::uint32_t token_count = 1;

  bool operator==(const ActivationSnapshot&) const = default;
};

// JumpReLU SAE parameters. Matrices are row-major:
//   encoder_matrix  d_model x n_features
//   decoder_matrix  n_features x d_model   (row i is feature i's direction)
struct SaeWeights {
  std::size_t d_model = 0;
  std::size_t n_features = 0;
  std::vector<float> encoder_matrix;
  std::vector<float> encoder_bias;
  std::vector<float> thresholds;
  std::vector<float> decoder_matrix;
  std::vector<float> decoder_bias;

  // Throws Error{kDimensionMismatch} if any buffer disagrees with the dims.
  void validate() const;

  std::span<const float> decoder_row(FeatureIndex i) const {
    return {decoder_matrix.data() + std::size_t(i) * d_model, d_model};
  }

  // All-zero weights of the given shape.
  static SaeWeights zeros(std::size_t d_model, std::size_t n_features);
};

}  // namespace emem
