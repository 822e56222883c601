// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Mapping between domain objects and .emt containers. These names are the
// contract with the capture bridge.
//
//   SAE weights          W_enc [d_model, n_features]   b_enc [n_features]
//                        threshold [n_features]        W_dec [n_features, d_model]
//                        b_dec [d_model]
//   Activation snapshot  resid/<layer>/<label>   [d_model] or [tokens, d_model]
//                        metadata "tokens/<layer>/<label>" = token count
//                        metadata "reduction" = "mean_tokens" | "last_token"
//   Feature vector       feat/<layer>/<label>    [n_features]

#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "emem/tensorio.hpp"
#include "emem/types.hpp"

namespace emem {

SaeWeights sae_from_container(const tensorio::Container& container);
tensorio::ContainerBuilder sae_to_container(const SaeWeights& sae);
SaeWeights load_sae(const std::filesystem::path& path);

// Per-token tensors ([tokens, d_model]) are averaged over tokens on load and
// the snapshot's token_count set to the row count.
std::vector<ActivationSnapshot> snapshots_from_container(const tensorio::Container& container);
void add_snapshot(tensorio::ContainerBuilder& builder, const ActivationSnapshot& snapshot);
tensorio::ContainerBuilder snapshots_to_container(std::span<const ActivationSnapshot> snapshots);
std::vector<ActivationSnapshot> load_snapshots(const std::filesystem::path& path);

std::vector<std::pair<Layer, FeatureVector>> features_from_container(const tensorio::Container& container);
void add_features(tensorio::ContainerBuilder& builder, Layer layer, const FeatureVector& features);

// Picks the snapshot with `label` (and `layer` if given); with no label the
// container must hold exactly one candidate.
const ActivationSnapshot& select_snapshot(std::span<const ActivationSnapshot> snapshots,
                                          std::optional<std::string_view> label,
                                          std::optional<Layer> layer = std::nullopt);

// Labels carry their class as the first path component: "fear/2" belongs to
// class "fear", "neutral/0" to "neutral".
std::string_view label_class(std::string_view label);

}  // namespace emem
