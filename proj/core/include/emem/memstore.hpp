// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Persistent two-vector emotional memories.
//
// On disk a store is a directory:
//   index.json          store settings plus one record per memory, in
//                       insertion order
//   memories/mNNNNNN.emt  tensors for one memory
//
// A memory pairs a context signature (early layer, decides when the echo
// fires) with emotion features and their echo (late layer, decides what is
// re-activated).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emem/echo.hpp"
#include "emem/matching.hpp"
#include "emem/types.hpp"

namespace emem::memstore {

struct EmotionMemory {
  std::string id;
  matching::BinarySignature context_signature;
  FeatureVector context_features;  // raw early-layer features behind the signature
  FeatureVector emotion_features;
  echo::EchoVector echo;
  std::string valence_tag;
  std::optional<std::string> semantic_label;  // stored, never injected
  std::int64_t created_at = 0;                // unix milliseconds
  double default_alpha = echo::kOrientationAlpha;

  void validate() const;
  bool operator==(const EmotionMemory&) const = default;
};

struct RecallHit {
  const EmotionMemory* memory = nullptr;  // points into the store; valid while it lives
  double score = 0.0;
  std::vector<double> scaled_delta;
};

struct RecallResult {
  std::optional<RecallHit> hit;
  matching::MatchResult match;
};

class MemoryStore {
 public:
  // Opens `root`, creating an empty store if the directory has no index.
  static MemoryStore open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }

  // Durable once it returns: the tensor file and the updated index are both
  // written with rename-into-place.
  void put(EmotionMemory memory);

  const EmotionMemory* find(std::string_view id) const;
  const EmotionMemory& get(std::string_view id) const;
  std::span<const EmotionMemory> memories() const { return memories_; }
  std::size_t size() const { return memories_.size(); }

  Layer context_layer() const { return context_layer_; }
  Layer emotion_layer() const { return emotion_layer_; }

  // Mean residual norm at the emotion layer; scales every injected delta.
  std::optional<double> emotion_reference_norm() const { return emotion_norm_; }
  void set_emotion_reference_norm(double norm);

  matching::MatchResult match(const matching::BinarySignature& query, double threshold) const;

  // Encodes the query through the context-layer SAE, binarizes against
  // `context_ref` and injects the best memory's echo at its default alpha.
  RecallResult recall(const ActivationSnapshot& query, const SaeWeights& context_sae,
                      const matching::ReferenceStats& context_ref,
                      double threshold = matching::kDefaultThreshold) const;

  std::vector<double> scaled_delta(const EmotionMemory& memory, std::optional<double> alpha_override = {}) const;

  // .emt bytes: "delta" [d_model], "alpha" [1], metadata layer, alpha,
  // source_memory, mean_residual_norm.
  std::string export_delta(std::string_view id, std::optional<double> alpha_override = {}) const;

 private:
  explicit MemoryStore(std::filesystem::path root) : root_(std::move(root)) {}

  void load();
  void write_index() const;

  std::filesystem::path root_;
  Layer context_layer_ = kContextLayer;
  Layer emotion_layer_ = kEmotionLayer;
  std::optional<double> emotion_norm_;
  std::vector<EmotionMemory> memories_;
  std::vector<std::string> files_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

// Assembles a memory from captured snapshots: the context snapshot is encoded
// and binarized, the emotion features and echo are taken as given.
EmotionMemory make_memory(std::string id, const ActivationSnapshot& context, const SaeWeights& context_sae,
                          const matching::ReferenceStats& context_ref, FeatureVector emotion_features,
                          echo::EchoVector echo, std::string valence_tag,
                          std::optional<std::string> semantic_label, double default_alpha,
                          std::int64_t created_at);

}  // namespace emem::memstore
