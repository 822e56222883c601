// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/matching.hpp"

#include <algorithm>
#include <cmath>

#include "emem/error.hpp"
#include "emem/numfmt.hpp"
#include "emem/sae.hpp"

namespace emem {

namespace matching {

void ReferenceStats::validate() const {
  if (per_feature_mean.empty()) fail(ErrorCode::kInvalidArgument, "reference stats have no features");
  if (!(mean_residual_norm > 0.0)) fail(ErrorCode::kInvalidArgument, "mean residual norm must be positive");
}

ReferenceStats compute_reference_stats(std::span<const ActivationSnapshot> snapshots, const SaeWeights& sae,
                                       std::string corpus_label) {
  if (snapshots.empty()) fail(ErrorCode::kInvalidArgument, "reference corpus is empty");
  const Layer layer = snapshots.front().layer;
  std::vector<double> acc(sae.n_features, 0.0);
  double norm_sum = 0.0;
  for (const auto& s : snapshots) {
    if (s.layer != layer) {
      fail(ErrorCode::kInvalidArgument, "reference corpus mixes layers " + std::to_string(layer) + " and " +
                                            std::to_string(s.layer));
    }
    auto f = sae::encode(s, sae);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += f.values[i];
    double sq = 0.0;
    for (float x : s.residual) sq += double(x) * double(x);
    norm_sum += std::sqrt(sq);
  }
  const double n = static_cast<double>(snapshots.size());
  ReferenceStats ref;
  ref.per_feature_mean.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) ref.per_feature_mean[i] = static_cast<float>(acc[i] / n);
  ref.mean_residual_norm = norm_sum / n;
  ref.corpus_label = std::move(corpus_label);
  ref.layer = layer;
  return ref;
}

tensorio::ContainerBuilder reference_stats_to_container(const ReferenceStats& ref) {
  ref.validate();
  tensorio::ContainerBuilder b;
  b.add("ref/per_feature_mean", ref.per_feature_mean)
      .add_scalar("ref/mean_residual_norm", static_cast<float>(ref.mean_residual_norm))
      .set_metadata("mean_residual_norm", format_exact(ref.mean_residual_norm))
      .set_metadata("layer", std::to_string(ref.layer))
      .set_metadata("corpus_label", ref.corpus_label);
  return b;
}

ReferenceStats reference_stats_from_container(const tensorio::Container& c) {
  ReferenceStats ref;
  ref.per_feature_mean = c.at("ref/per_feature_mean").values;
  if (auto exact = c.metadata_or("mean_residual_norm"); !exact.empty()) {
    ref.mean_residual_norm = parse_double(exact);
  } else {
    ref.mean_residual_norm = c.at("ref/mean_residual_norm").values.at(0);
  }
  ref.layer = std::stoi(c.metadata_or("layer", std::to_string(kContextLayer)));
  ref.corpus_label = c.metadata_or("corpus_label");
  ref.validate();
  return ref;
}

ReferenceStats load_reference_stats(const std::filesystem::path& path) {
  return reference_stats_from_container(tensorio::read_container_file(path));
}

BinarySignature::BinarySignature(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

BinarySignature BinarySignature::from_bools(std::span<const bool> bits) {
  BinarySignature s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) s.set(i);
  }
  return s;
}

BinarySignature BinarySignature::from_indices(std::size_t size, std::span<const FeatureIndex> set_bits) {
  BinarySignature s(size);
  for (auto i : set_bits) {
    if (i >= size) fail(ErrorCode::kInvalidArgument, "bit " + std::to_string(i) + " out of range");
    s.set(i);
  }
  return s;
}

void BinarySignature::set(std::size_t i) {
  auto& w = words_[i / 64];
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (!(w & mask)) {
    w |= mask;
    ++popcount_;
  }
}

std::vector<FeatureIndex> BinarySignature::set_indices() const {
  std::vector<FeatureIndex> out;
  out.reserve(popcount_);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(static_cast<FeatureIndex>(w * 64 + std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

std::size_t BinarySignature::overlap(const BinarySignature& other) const {
  if (size_ != other.size_) {
    fail(ErrorCode::kDimensionMismatch, "signatures of length " + std::to_string(size_) + " and " +
                                            std::to_string(other.size_));
  }
  std::size_t n = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) n += std::popcount(words_[w] & other.words_[w]);
  return n;
}

BinarySignature binarize(std::span<const float> f, std::span<const float> per_feature_mean) {
  if (f.size() != per_feature_mean.size()) {
    fail(ErrorCode::kDimensionMismatch, "feature vector has " + std::to_string(f.size()) +
                                            " values, reference has " + std::to_string(per_feature_mean.size()));
  }
  BinarySignature s(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (double(f[j]) - double(per_feature_mean[j]) > 0.0) s.set(j);
  }
  return s;
}

BinarySignature binarize(const FeatureVector& f, const ReferenceStats& ref) {
  return binarize(f.values, ref.per_feature_mean);
}

double bdn(const BinarySignature& a, const BinarySignature& b) {
  const std::size_t shared = a.overlap(b);
  if (a.popcount() == 0 || b.popcount() == 0) return 0.0;
  return double(shared) / std::sqrt(double(a.popcount()) * double(b.popcount()));
}

MatchResult best_match(const BinarySignature& query, std::span<const SignatureRef> memories, double threshold) {
  MatchResult result;
  result.ranked.reserve(memories.size());
  for (std::size_t i = 0; i < memories.size(); ++i) {
    double score = bdn(query, *memories[i].signature);
    result.ranked.push_back({std::string(memories[i].id), score, score >= threshold, i});
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; });
  if (!result.ranked.empty() && result.ranked.front().matched) result.best = result.ranked.front();
  return result;
}

}  // namespace matching
}  // namespace emem
