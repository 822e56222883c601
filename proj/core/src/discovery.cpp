// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/discovery.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "emem/error.hpp"

namespace emem::discovery {
namespace {

void check_equal_lengths(std::span<const FeatureVector> vectors, const char* what) {
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      fail(ErrorCode::kDimensionMismatch, std::string(what) + ": feature vectors differ in length");
    }
  }
}

// Relative cutoff below which an eigenvalue counts as zero.
constexpr double kRankTolerance = 1e-10;

}  // namespace

void ProbeCorpus::validate() const {
  if (emotional.empty()) fail(ErrorCode::kInvalidArgument, "probe corpus has no emotional entries");
  if (neutral.empty()) fail(ErrorCode::kInvalidArgument, "probe corpus has no neutral entries");
  const std::size_t n = emotional.front().features.size();
  for (const auto& e : emotional) {
    if (e.features.size() != n) fail(ErrorCode::kDimensionMismatch, "emotional vectors differ in length");
  }
  for (const auto& f : neutral) {
    if (f.size() != n) fail(ErrorCode::kDimensionMismatch, "neutral vector length differs from emotional");
  }
}

std::size_t ProbeCorpus::n_features() const {
  return emotional.empty() ? 0 : emotional.front().features.size();
}

FeatureVector mean_profile(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) fail(ErrorCode::kInvalidArgument, "mean of an empty set");
  check_equal_lengths(vectors, "mean_profile");
  const std::size_t n = vectors.front().size();
  std::vector<double> acc(n, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += v.values[i];
  }
  FeatureVector out{std::vector<float>(n), "mean"};
  const double count = static_cast<double>(vectors.size());
  for (std::size_t i = 0; i < n; ++i) out.values[i] = static_cast<float>(acc[i] / count);
  return out;
}

ExclusivityReport exclusive_features(const ProbeCorpus& corpus, double hi, double lo) {
  corpus.validate();
  const std::size_t n = corpus.n_features();
  std::vector<float> emo_max(n, -INFINITY), neu_max(n, -INFINITY);
  for (const auto& e : corpus.emotional) {
    for (std::size_t i = 0; i < n; ++i) emo_max[i] = std::max(emo_max[i], e.features.values[i]);
  }
  for (const auto& f : corpus.neutral) {
    for (std::size_t i = 0; i < n; ++i) neu_max[i] = std::max(neu_max[i], f.values[i]);
  }

  ExclusivityReport report;
  report.hi_threshold = hi;
  report.lo_threshold = lo;
  for (std::size_t i = 0; i < n; ++i) {
    if (emo_max[i] > hi && neu_max[i] < lo) report.exclusive_indices.push_back(static_cast<FeatureIndex>(i));
  }

  std::map<std::string, std::vector<FeatureVector>> grouped;
  for (const auto& e : corpus.emotional) grouped[e.emotion].push_back(e.features);
  for (auto& [label, vs] : grouped) {
    auto profile = mean_profile(vs);
    profile.source_label = label;
    report.per_emotion_profiles.emplace(label, std::move(profile));
  }
  return report;
}

double CosineMatrix::mean_off_diagonal() const {
  const std::size_t n = size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) sum += at(r, c);
  }
  return sum / (double(n) * double(n - 1) / 2.0);
}

CosineMatrix cosine_matrix(const std::map<std::string, FeatureVector>& profiles,
                           std::optional<std::span<const FeatureIndex>> restrict_to) {
  if (profiles.size() < 2) fail(ErrorCode::kInvalidArgument, "cosine matrix needs at least two profiles");
  const std::size_t len = profiles.begin()->second.size();
  std::vector<std::vector<double>> rows;
  CosineMatrix m;
  for (const auto& [label, f] : profiles) {
    if (f.size() != len) fail(ErrorCode::kDimensionMismatch, "profile '" + label + "' differs in length");
    std::vector<double> v;
    if (restrict_to) {
      v.reserve(restrict_to->size());
      for (auto i : *restrict_to) {
        if (i >= len) fail(ErrorCode::kInvalidArgument, "restriction index " + std::to_string(i) + " out of range");
        v.push_back(f.values[i]);
      }
    } else {
      v.assign(f.values.begin(), f.values.end());
    }
    m.labels.push_back(label);
    rows.push_back(std::move(v));
  }

  const std::size_t n = rows.size();
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (double x : rows[r]) s += x * x;
    norms[r] = std::sqrt(s);
    m.zero_norm.push_back(norms[r] == 0.0);
  }
  m.values.assign(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (m.zero_norm[r]) continue;
    m.values[r * n + r] = 1.0;
    for (std::size_t c = r + 1; c < n; ++c) {
      if (m.zero_norm[c]) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < rows[r].size(); ++i) dot += rows[r][i] * rows[c][i];
      double cos = std::clamp(dot / (norms[r] * norms[c]), -1.0, 1.0);
      m.values[r * n + c] = m.values[c * n + r] = cos;
    }
  }
  return m;
}

Pca2 pca2(std::span<const FeatureVector> vectors) {
  if (vectors.size() < 3) fail(ErrorCode::kInvalidArgument, "PCA needs at least three vectors");
  check_equal_lengths(vectors, "pca2");
  const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
  const Eigen::Index d = static_cast<Eigen::Index>(vectors.front().size());

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = vectors[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(c)];
  }
  x.rowwise() -= x.colwise().mean();

  // Eigenvectors of the smaller of X^T X (d x d) and X X^T (n x n); both share
  // their non-zero spectrum. Loadings (d-dim principal axes) are recovered
  // from the Gram eigenvectors when n < d.
  Eigen::VectorXd evals;
  Eigen::MatrixXd axes;  // d x k, columns sorted by descending eigenvalue
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x);
    evals = es.eigenvalues().reverse();
    axes = es.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x * x.transpose());
    evals = es.eigenvalues().reverse();
    Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    axes = Eigen::MatrixXd::Zero(d, std::min<Eigen::Index>(2, n));
    for (Eigen::Index k = 0; k < axes.cols(); ++k) {
      if (evals(k) > 0.0) axes.col(k) = x.transpose() * u.col(k) / std::sqrt(evals(k));
    }
  }
  for (Eigen::Index k = 0; k < evals.size(); ++k) evals(k) = std::max(evals(k), 0.0);

  Pca2 out;
  const double total = evals.sum();
  out.eigenvalues.resize(static_cast<std::size_t>(evals.size()));
  for (Eigen::Index k = 0; k < evals.size(); ++k) out.eigenvalues[static_cast<std::size_t>(k)] = evals(k) / double(n - 1);

  const double cutoff = kRankTolerance * std::max(total, 1e-300);
  std::array<bool, 2> live{};
  for (int k = 0; k < 2; ++k) {
    live[k] = k < evals.size() && total > 0.0 && evals(k) > cutoff;
    if (!live[k]) {
      out.rank_deficient = true;
      continue;
    }
    Eigen::Index arg = 0;
    axes.col(k).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, k) < 0.0) axes.col(k) = -axes.col(k);
  }
  out.variance_explained =
      total > 0.0 ? ((live[0] ? evals(0) : 0.0) + (live[1] ? evals(1) : 0.0)) / total : 0.0;

  out.projections.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    auto& p = out.projections[static_cast<std::size_t>(r)];
    for (int k = 0; k < 2; ++k) p[k] = live[k] ? x.row(r).dot(axes.col(k)) : 0.0;
  }
  return out;
}

}  // namespace emem::discovery
