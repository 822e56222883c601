// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "emem/types.hpp"

namespace emem::sae {

// JumpReLU encode: z = residual . W_enc + b_enc; feature i keeps z_i only when
// z_i > threshold_i, otherwise it is exactly zero.
FeatureVector encode(std::span<const float> residual, const SaeWeights& sae, std::string source_label = {});

FeatureVector encode(const ActivationSnapshot& snapshot, const SaeWeights& sae);

std::vector<FeatureVector> encode_batch(std::span<const ActivationSnapshot> snapshots, const SaeWeights& sae);

enum class DecoderBias : bool { kExclude = false, kInclude = true };

// features . W_dec (+ b_dec). Accumulates in double; zero features are skipped.
std::vector<double> decode(std::span<const float> features, const SaeWeights& sae, DecoderBias bias);

inline std::vector<double> decode(const FeatureVector& features, const SaeWeights& sae, DecoderBias bias) {
  return decode(std::span<const float>(features.values), sae, bias);
}

}  // namespace emem::sae
