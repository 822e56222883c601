// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Distinctive-feature echoes: select the K features that deviate most from
// the conditioning mean, rebuild them in residual space through the decoder,
// and rescale to a fixed fraction of the typical residual norm for injection.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "emem/tensorio.hpp"
#include "emem/types.hpp"

namespace emem::echo {

inline constexpr std::size_t kDefaultK = 50;
inline constexpr double kOrientationAlpha = 0.05;
inline constexpr double kDecisionAlpha = 0.20;

struct EchoConfig {
  std::size_t k = kDefaultK;
  double alpha = kOrientationAlpha;

  // k in [1, n_features], alpha in [0, 1].
  void validate(std::size_t n_features) const;
};

struct EchoVector {
  std::vector<float> delta;                  // residual-space reconstruction
  std::vector<FeatureIndex> source_indices;  // in rank order
  std::string source_memory;

  bool operator==(const EchoVector&) const = default;
};

// Indices of the k largest |f_i - mean_i|, largest first; equal deviations
// rank the lower index first.
std::vector<FeatureIndex> distinctive_features(const FeatureVector& f, const FeatureVector& mean, std::size_t k);

// Decoder reconstruction of f restricted to `indices`, raw activations, no
// decoder bias.
EchoVector reconstruct_echo(const FeatureVector& f, std::span<const FeatureIndex> indices, const SaeWeights& sae,
                            std::string source_memory = {});

// alpha * mean_residual_norm / |delta| * delta. Throws kDegenerate for a zero
// echo and kInvalidArgument for negative alpha or non-positive norm.
std::vector<double> injection_delta(const EchoVector& echo, double alpha, double mean_residual_norm);

std::vector<double> apply_injection(std::span<const float> residual, std::span<const double> scaled_delta);

// Builds one echo per conditioning experience, with the distinctive features
// measured against the mean of the whole set.
std::vector<EchoVector> build_echoes(std::span<const FeatureVector> conditioning, const SaeWeights& sae,
                                     const EchoConfig& config);

// Container form: "echo/<id>/delta", "echo/<id>/source_indices", with
// metadata "k", "alpha".
void add_echo(tensorio::ContainerBuilder& builder, const EchoVector& echo);
std::vector<EchoVector> echoes_from_container(const tensorio::Container& container);

}  // namespace emem::echo
