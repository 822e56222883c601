// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/memstore.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emem/error.hpp"
#include "emem/numfmt.hpp"
#include "emem/sae.hpp"

namespace emem::memstore {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kIndexVersion = 1;
constexpr const char* kIndexName = "index.json";
constexpr const char* kMemoryDir = "memories";

std::string memory_file_name(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "m%06zu.emt", ordinal);
  return buf;
}

std::vector<float> signature_as_floats(const matching::BinarySignature& s) {
  std::vector<float> out(s.size(), 0.0f);
  for (auto i : s.set_indices()) out[i] = 1.0f;
  return out;
}

matching::BinarySignature signature_from_floats(std::span<const float> v) {
  matching::BinarySignature s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 1.0f) {
      s.set(i);
    } else if (v[i] != 0.0f) {
      fail(ErrorCode::kMalformed, "context signature holds a non-binary value");
    }
  }
  return s;
}

std::string memory_bytes(const EmotionMemory& m) {
  tensorio::ContainerBuilder b;
  b.add("context/signature", signature_as_floats(m.context_signature));
  if (m.context_features.size()) b.add("context/features", m.context_features.values);
  b.add("emotion/features", m.emotion_features.values);
  b.add("echo/delta", m.echo.delta);
  std::vector<float> idx(m.echo.source_indices.begin(), m.echo.source_indices.end());
  if (!idx.empty()) b.add("echo/source_indices", idx);
  b.set_metadata("id", m.id)
      .set_metadata("context_label", m.context_features.source_label)
      .set_metadata("emotion_label", m.emotion_features.source_label)
      .set_metadata("echo_source", m.echo.source_memory);
  return b.bytes();
}

}  // namespace

void EmotionMemory::validate() const {
  if (id.empty()) fail(ErrorCode::kInvalidArgument, "memory id is empty");
  if (context_signature.size() == 0) fail(ErrorCode::kInvalidArgument, "memory '" + id + "' has no context signature");
  if (context_features.size() && context_features.size() != context_signature.size()) {
    fail(ErrorCode::kDimensionMismatch, "memory '" + id + "' context features and signature differ in length");
  }
  if (echo.delta.empty()) fail(ErrorCode::kInvalidArgument, "memory '" + id + "' has an empty echo");
  for (auto i : echo.source_indices) {
    if (i >= emotion_features.size()) {
      fail(ErrorCode::kInvalidArgument, "memory '" + id + "' echo index " + std::to_string(i) +
                                            " outside its emotion features");
    }
  }
  if (!(default_alpha >= 0.0)) fail(ErrorCode::kInvalidArgument, "memory '" + id + "' has negative alpha");
}

MemoryStore MemoryStore::open(const fs::path& root) {
  MemoryStore store(root);
  std::error_code ec;
  fs::create_directories(root / kMemoryDir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create store at '" + root.string() + "': " + ec.message());
  if (fs::exists(root / kIndexName)) {
    store.load();
  } else {
    store.write_index();
  }
  return store;
}

void MemoryStore::load() {
  std::ifstream in(root_ / kIndexName);
  if (!in) fail(ErrorCode::kIo, "cannot read " + (root_ / kIndexName).string());
  json index;
  try {
    index = json::parse(in);
    if (index.at("version").get<int>() != kIndexVersion) fail(ErrorCode::kMalformed, "unsupported store version");
    context_layer_ = index.at("context_layer").get<Layer>();
    emotion_layer_ = index.at("emotion_layer").get<Layer>();
    if (auto it = index.find("emotion_mean_residual_norm"); it != index.end() && !it->is_null()) {
      emotion_norm_ = parse_double(it->get<std::string>());
    }
    for (const auto& rec : index.at("memories")) {
      const auto file = rec.at("file").get<std::string>();
      auto c = tensorio::read_container_file(root_ / kMemoryDir / file);
      EmotionMemory m;
      m.id = rec.at("id").get<std::string>();
      if (c.metadata_or("id") != m.id) fail(ErrorCode::kMalformed, "tensor file " + file + " belongs to another id");
      m.context_signature = signature_from_floats(c.at("context/signature").values);
      if (const auto* t = c.find("context/features")) m.context_features.values = t->values;
      m.context_features.source_label = c.metadata_or("context_label");
      m.emotion_features = {c.at("emotion/features").values, c.metadata_or("emotion_label")};
      m.echo.delta = c.at("echo/delta").values;
      if (const auto* t = c.find("echo/source_indices")) {
        for (float v : t->values) m.echo.source_indices.push_back(static_cast<FeatureIndex>(v));
      }
      m.echo.source_memory = c.metadata_or("echo_source");
      m.valence_tag = rec.at("valence_tag").get<std::string>();
      if (const auto& sl = rec.at("semantic_label"); !sl.is_null()) m.semantic_label = sl.get<std::string>();
      m.created_at = rec.at("created_at").get<std::int64_t>();
      m.default_alpha = parse_double(rec.at("default_alpha").get<std::string>());
      if (!by_id_.emplace(m.id, memories_.size()).second) fail(ErrorCode::kMalformed, "index repeats id " + m.id);
      memories_.push_back(std::move(m));
      files_.push_back(file);
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kMalformed, std::string("store index: ") + ex.what());
  }
}

void MemoryStore::write_index() const {
  json records = json::array();
  for (std::size_t i = 0; i < memories_.size(); ++i) {
    const auto& m = memories_[i];
    records.push_back({{"id", m.id},
                       {"file", files_[i]},
                       {"valence_tag", m.valence_tag},
                       {"semantic_label", m.semantic_label ? json(*m.semantic_label) : json(nullptr)},
                       {"created_at", m.created_at},
                       {"default_alpha", format_exact(m.default_alpha)},
                       {"context_features", m.context_signature.size()},
                       {"emotion_features", m.emotion_features.size()},
                       {"d_model", m.echo.delta.size()}});
  }
  json index = {{"version", kIndexVersion},
                {"context_layer", context_layer_},
                {"emotion_layer", emotion_layer_},
                {"emotion_mean_residual_norm", emotion_norm_ ? json(format_exact(*emotion_norm_)) : json(nullptr)},
                {"memories", std::move(records)}};
  tensorio::write_file_atomic(root_ / kIndexName, index.dump(2) + "\n");
}

void MemoryStore::put(EmotionMemory memory) {
  memory.validate();
  if (by_id_.contains(memory.id)) fail(ErrorCode::kDuplicate, "memory id '" + memory.id + "' already stored");
  if (!memories_.empty()) {
    const auto& first = memories_.front();
    if (memory.context_signature.size() != first.context_signature.size() ||
        memory.echo.delta.size() != first.echo.delta.size()) {
      fail(ErrorCode::kDimensionMismatch, "memory '" + memory.id + "' dims differ from the store's");
    }
  }
  const std::string file = memory_file_name(memories_.size());
  tensorio::write_file_atomic(root_ / kMemoryDir / file, memory_bytes(memory));
  by_id_.emplace(memory.id, memories_.size());
  memories_.push_back(std::move(memory));
  files_.push_back(file);
  try {
    write_index();
  } catch (...) {
    by_id_.erase(memories_.back().id);
    memories_.pop_back();
    files_.pop_back();
    throw;
  }
}

const EmotionMemory* MemoryStore::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &memories_[it->second];
}

const EmotionMemory& MemoryStore::get(std::string_view id) const {
  const auto* m = find(id);
  if (!m) fail(ErrorCode::kNotFound, "no memory with id '" + std::string(id) + "'");
  return *m;
}

void MemoryStore::set_emotion_reference_norm(double norm) {
  if (!(norm > 0.0)) fail(ErrorCode::kInvalidArgument, "mean residual norm must be positive");
  emotion_norm_ = norm;
  write_index();
}

matching::MatchResult MemoryStore::match(const matching::BinarySignature& query, double threshold) const {
  std::vector<matching::SignatureRef> refs;
  refs.reserve(memories_.size());
  for (const auto& m : memories_) refs.push_back({m.id, &m.context_signature});
  return matching::best_match(query, refs, threshold);
}

std::vector<double> MemoryStore::scaled_delta(const EmotionMemory& memory, std::optional<double> alpha_override) const {
  if (!emotion_norm_) {
    fail(ErrorCode::kNotFound, "store has no emotion-layer reference stats; set the mean residual norm first");
  }
  return echo::injection_delta(memory.echo, alpha_override.value_or(memory.default_alpha), *emotion_norm_);
}

RecallResult MemoryStore::recall(const ActivationSnapshot& query, const SaeWeights& context_sae,
                                 const matching::ReferenceStats& context_ref, double threshold) const {
  if (query.layer != context_layer_) {
    fail(ErrorCode::kInvalidArgument, "recall query is from layer " + std::to_string(query.layer) +
                                          ", store matches at layer " + std::to_string(context_layer_));
  }
  if (context_ref.layer != context_layer_) {
    fail(ErrorCode::kInvalidArgument, "reference stats are for layer " + std::to_string(context_ref.layer));
  }
  if (!emotion_norm_) fail(ErrorCode::kNotFound, "store has no emotion-layer reference stats");
  auto features = sae::encode(query, context_sae);
  auto signature = matching::binarize(features, context_ref);
  RecallResult result;
  result.match = match(signature, threshold);
  if (result.match.best) {
    const auto& mem = memories_[result.match.best->insertion_index];
    result.hit = RecallHit{&mem, result.match.best->score, scaled_delta(mem)};
  }
  return result;
}

std::string MemoryStore::export_delta(std::string_view id, std::optional<double> alpha_override) const {
  const auto& m = get(id);
  const double alpha = alpha_override.value_or(m.default_alpha);
  auto delta = scaled_delta(m, alpha);
  std::vector<float> f32(delta.begin(), delta.end());
  tensorio::ContainerBuilder b;
  b.add("delta", f32)
      .add_scalar("alpha", static_cast<float>(alpha))
      .set_metadata("layer", std::to_string(emotion_layer_))
      .set_metadata("alpha", format_exact(alpha))
      .set_metadata("source_memory", m.id)
      .set_metadata("mean_residual_norm", format_exact(*emotion_norm_));
  return b.bytes();
}

EmotionMemory make_memory(std::string id, const ActivationSnapshot& context, const SaeWeights& context_sae,
                          const matching::ReferenceStats& context_ref, FeatureVector emotion_features,
                          echo::EchoVector echo, std::string valence_tag,
                          std::optional<std::string> semantic_label, double default_alpha,
                          std::int64_t created_at) {
  EmotionMemory m;
  m.id = std::move(id);
  m.context_features = sae::encode(context, context_sae);
  m.context_signature = matching::binarize(m.context_features, context_ref);
  m.emotion_features = std::move(emotion_features);
  m.echo = std::move(echo);
  m.echo.source_memory = m.id;
  m.valence_tag = std::move(valence_tag);
  m.semantic_label = std::move(semantic_label);
  m.default_alpha = default_alpha;
  m.created_at = created_at;
  m.validate();
  return m;
}

}  // namespace emem::memstore
