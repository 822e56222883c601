// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Context similarity on mean-subtracted, binarized SAE features.
//
//   b_j = 1  iff  f_j - mean_j > 0
//   BDN(b1, b2) = |b1 & b2| / sqrt(|b1| * |b2|)     (0 if either is empty)

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emem/tensorio.hpp"
#include "emem/types.hpp"

namespace emem::matching {

inline constexpr double kDefaultThreshold = 0.35;

struct ReferenceStats {
  std::vector<float> per_feature_mean;
  double mean_residual_norm = 0.0;
  std::string corpus_label;
  Layer layer = kContextLayer;

  void validate() const;
  bool operator==(const ReferenceStats&) const = default;
};

ReferenceStats compute_reference_stats(std::span<const ActivationSnapshot> snapshots, const SaeWeights& sae,
                                       std::string corpus_label = {});

// Names: "ref/per_feature_mean" [n], "ref/mean_residual_norm" [1]; metadata
// carries the exact norm, the layer and the corpus label.
tensorio::ContainerBuilder reference_stats_to_container(const ReferenceStats& ref);
ReferenceStats reference_stats_from_container(const tensorio::Container& container);
ReferenceStats load_reference_stats(const std::filesystem::path& path);

// Packed bitset with a cached popcount.
class BinarySignature {
 public:
  BinarySignature() = default;
  explicit BinarySignature(std::size_t size);
  static BinarySignature from_bools(std::span<const bool> bits);
  static BinarySignature from_indices(std::size_t size, std::span<const FeatureIndex> set_bits);

  std::size_t size() const { return size_; }
  std::size_t popcount() const { return popcount_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i);
  std::span<const std::uint64_t> words() const { return words_; }
  std::vector<FeatureIndex> set_indices() const;

  // Shared set bits.
  std::size_t overlap(const BinarySignature& other) const;

  bool operator==(const BinarySignature&) const = default;

 private:
  std::size_t size_ = 0;
  std::size_t popcount_ = 0;
  std::vector<std::uint64_t> words_;
};

BinarySignature binarize(const FeatureVector& f, const ReferenceStats& ref);
BinarySignature binarize(std::span<const float> f, std::span<const float> per_feature_mean);

double bdn(const BinarySignature& a, const BinarySignature& b);

struct SignatureRef {
  std::string_view id;
  const BinarySignature* signature = nullptr;
};

struct ScoredCandidate {
  std::string id;
  double score = 0.0;
  bool matched = false;
  std::size_t insertion_index = 0;

  bool operator==(const ScoredCandidate&) const = default;
};

struct MatchResult {
  std::optional<ScoredCandidate> best;
  std::vector<ScoredCandidate> ranked;  // score descending, insertion order on ties
};

// The argmax survives only if its score reaches `threshold`. `matched` marks
// every ranked candidate at or above the threshold.
MatchResult best_match(const BinarySignature& query, std::span<const SignatureRef> memories,
                       double threshold = kDefaultThreshold);

}  // namespace emem::matching
