// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Emotion-exclusive feature discovery and inter-emotion geometry.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emem/types.hpp"

namespace emem::discovery {

inline constexpr double kDefaultHi = 5.0;
inline constexpr double kDefaultLo = 1.0;

struct LabeledFeatures {
  std::string emotion;
  FeatureVector features;
};

struct ProbeCorpus {
  std::vector<LabeledFeatures> emotional;
  std::vector<FeatureVector> neutral;

  // At least one entry per class, every vector the same length.
  void validate() const;
  std::size_t n_features() const;
};

struct ExclusivityReport {
  std::vector<FeatureIndex> exclusive_indices;
  double hi_threshold = kDefaultHi;
  double lo_threshold = kDefaultLo;
  std::map<std::string, FeatureVector> per_emotion_profiles;
};

// Elementwise mean, accumulated in double.
FeatureVector mean_profile(std::span<const FeatureVector> vectors);

// A feature is exclusive when its maximum over emotional texts exceeds `hi`
// and its maximum over neutral texts stays below `lo` (both strict).
ExclusivityReport exclusive_features(const ProbeCorpus& corpus, double hi = kDefaultHi, double lo = kDefaultLo);

struct CosineMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major labels.size()^2
  std::vector<bool> zero_norm; // per label; such rows and columns are 0

  double at(std::size_t r, std::size_t c) const { return values[r * labels.size() + c]; }
  std::size_t size() const { return labels.size(); }
  // Mean of the strictly upper triangle.
  double mean_off_diagonal() const;
};

CosineMatrix cosine_matrix(const std::map<std::string, FeatureVector>& profiles,
                           std::optional<std::span<const FeatureIndex>> restrict_to = std::nullopt);

struct Pca2 {
  std::vector<std::array<double, 2>> projections;
  double variance_explained = 0.0;
  // Covariance eigenvalues in descending order (sample covariance, n-1).
  std::vector<double> eigenvalues;
  // Set when the centered data has rank below 2; missing axes project to 0.
  bool rank_deficient = false;
};

// Projects onto the top two principal components of the mean-centred data.
// Each axis is oriented so that its largest-magnitude loading is positive.
Pca2 pca2(std::span<const FeatureVector> vectors);

}  // namespace emem::discovery
