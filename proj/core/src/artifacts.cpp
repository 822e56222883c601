// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/artifacts.hpp"

#include <charconv>

#include "emem/error.hpp"

namespace emem {
namespace {

constexpr std::string_view kResidPrefix = "resid/";
constexpr std::string_view kFeatPrefix = "feat/";

const tensorio::Tensor& require(const tensorio::Container& c, std::string_view name) {
  const auto* t = c.find(name);
  if (!t) fail(ErrorCode::kNotFound, "SAE container is missing '" + std::string(name) + "'");
  return *t;
}

std::size_t dim(const tensorio::Tensor& t, std::size_t axis, std::string_view name) {
  if (axis >= t.shape.size()) {
    fail(ErrorCode::kDimensionMismatch, "'" + std::string(name) + "' has rank " + std::to_string(t.shape.size()));
  }
  return static_cast<std::size_t>(t.shape[axis]);
}

// Splits "<prefix><layer>/<label>".
std::optional<std::pair<Layer, std::string>> split_layer_name(std::string_view name, std::string_view prefix) {
  if (!name.starts_with(prefix)) return std::nullopt;
  name.remove_prefix(prefix.size());
  auto slash = name.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == name.size()) return std::nullopt;
  Layer layer = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + slash, layer);
  if (ec != std::errc{} || ptr != name.data() + slash) return std::nullopt;
  return std::pair{layer, std::string(name.substr(slash + 1))};
}

std::string layer_name(std::string_view prefix, Layer layer, std::string_view label) {
  return std::string(prefix) + std::to_string(layer) + "/" + std::string(label);
}

}  // namespace

SaeWeights sae_from_container(const tensorio::Container& c) {
  const auto& w_enc = require(c, "W_enc");
  const auto& b_enc = require(c, "b_enc");
  const auto& thr = require(c, "threshold");
  const auto& w_dec = require(c, "W_dec");
  const auto& b_dec = require(c, "b_dec");
  if (w_enc.shape.size() != 2 || w_dec.shape.size() != 2) {
    fail(ErrorCode::kDimensionMismatch, "W_enc and W_dec must be rank 2");
  }
  SaeWeights sae;
  sae.d_model = dim(w_enc, 0, "W_enc");
  sae.n_features = dim(w_enc, 1, "W_enc");
  if (dim(w_dec, 0, "W_dec") != sae.n_features || dim(w_dec, 1, "W_dec") != sae.d_model) {
    fail(ErrorCode::kDimensionMismatch, "W_dec shape is not [n_features, d_model]");
  }
  sae.encoder_matrix = w_enc.values;
  sae.encoder_bias = b_enc.values;
  sae.thresholds = thr.values;
  sae.decoder_matrix = w_dec.values;
  sae.decoder_bias = b_dec.values;
  sae.validate();
  return sae;
}

tensorio::ContainerBuilder sae_to_container(const SaeWeights& sae) {
  sae.validate();
  const std::uint64_t d = sae.d_model, n = sae.n_features;
  tensorio::ContainerBuilder b;
  b.add("W_enc", {d, n}, sae.encoder_matrix)
      .add("b_enc", sae.encoder_bias)
      .add("threshold", sae.thresholds)
      .add("W_dec", {n, d}, sae.decoder_matrix)
      .add("b_dec", sae.decoder_bias);
  return b;
}

SaeWeights load_sae(const std::filesystem::path& path) {
  return sae_from_container(tensorio::read_container_file(path));
}

std::vector<ActivationSnapshot> snapshots_from_container(const tensorio::Container& c) {
  std::vector<ActivationSnapshot> out;
  // Manifest order is payload order, which is the order the producer wrote.
  for (const auto& entry : c.manifest.entries) {
    auto parsed = split_layer_name(entry.name, kResidPrefix);
    if (!parsed) continue;
    const auto& t = c.at(entry.name);
    ActivationSnapshot s;
    s.layer = parsed->first;
    s.label = parsed->second;
    if (t.shape.size() == 1) {
      s.residual = t.values;
      std::string tokens = c.metadata_or("tokens/" + std::to_string(s.layer) + "/" + s.label, "1");
      unsigned long count = std::stoul(tokens);
      if (count == 0) fail(ErrorCode::kMalformed, "snapshot '" + entry.name + "' has zero tokens");
      s.token_count = static_cast<std::uint32_t>(count);
    } else if (t.shape.size() == 2) {
      const auto rows = static_cast<std::size_t>(t.shape[0]);
      const auto cols = static_cast<std::size_t>(t.shape[1]);
      std::vector<double> acc(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) acc[j] += t.values[r * cols + j];
      }
      s.residual.resize(cols);
      for (std::size_t j = 0; j < cols; ++j) s.residual[j] = static_cast<float>(acc[j] / double(rows));
      s.token_count = static_cast<std::uint32_t>(rows);
    } else {
      fail(ErrorCode::kDimensionMismatch, "snapshot '" + entry.name + "' must be rank 1 or 2");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void add_snapshot(tensorio::ContainerBuilder& builder, const ActivationSnapshot& s) {
  builder.add(layer_name(kResidPrefix, s.layer, s.label), s.residual);
  builder.set_metadata("tokens/" + std::to_string(s.layer) + "/" + s.label, std::to_string(s.token_count));
}

tensorio::ContainerBuilder snapshots_to_container(std::span<const ActivationSnapshot> snapshots) {
  tensorio::ContainerBuilder b;
  for (const auto& s : snapshots) add_snapshot(b, s);
  return b;
}

std::vector<ActivationSnapshot> load_snapshots(const std::filesystem::path& path) {
  return snapshots_from_container(tensorio::read_container_file(path));
}

std::vector<std::pair<Layer, FeatureVector>> features_from_container(const tensorio::Container& c) {
  std::vector<std::pair<Layer, FeatureVector>> out;
  for (const auto& entry : c.manifest.entries) {
    auto parsed = split_layer_name(entry.name, kFeatPrefix);
    if (!parsed) continue;
    const auto& t = c.at(entry.name);
    if (t.shape.size() != 1) fail(ErrorCode::kDimensionMismatch, "'" + entry.name + "' must be rank 1");
    out.emplace_back(parsed->first, FeatureVector{t.values, parsed->second});
  }
  return out;
}

void add_features(tensorio::ContainerBuilder& builder, Layer layer, const FeatureVector& f) {
  builder.add(layer_name(kFeatPrefix, layer, f.source_label), f.values);
}

const ActivationSnapshot& select_snapshot(std::span<const ActivationSnapshot> snapshots,
                                          std::optional<std::string_view> label, std::optional<Layer> layer) {
  const ActivationSnapshot* hit = nullptr;
  std::size_t candidates = 0;
  for (const auto& s : snapshots) {
    if (layer && s.layer != *layer) continue;
    if (label && s.label != *label) continue;
    hit = &s;
    ++candidates;
  }
  std::string where = label ? " with label '" + std::string(*label) + "'" : std::string();
  if (layer) where += " at layer " + std::to_string(*layer);
  if (candidates == 0) fail(ErrorCode::kNotFound, "no snapshot" + where);
  if (candidates > 1) {
    fail(ErrorCode::kInvalidArgument, std::to_string(candidates) + " snapshots" + where + "; pass a label");
  }
  return *hit;
}

std::string_view label_class(std::string_view label) {
  auto slash = label.find('/');
  return slash == std::string_view::npos ? label : label.substr(0, slash);
}

}  // namespace emem
