// Copyright 2026 The ModelSearch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Feature vectors and per-model moment statistics.
//
// A generative model is summarized by the first and second moments of the
// embeddings of images sampled from it. Moments are accumulated in double
// precision; persisted statistics are rounded to float32 (see
// quantize_to_storage).

#ifndef MODELSEARCH_FEATURE_STATS_H_
#define MODELSEARCH_FEATURE_STATS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace modelsearch {

// Number of entries in the packed lower triangle of a dim x dim matrix.
constexpr std::size_t packed_size(std::size_t dim) {
  return dim * (dim + 1) / 2;
}

// Offset of (row, col), row >= col, in row-major packed lower storage.
constexpr std::size_t packed_index(std::size_t row, std::size_t col) {
  return row * (row + 1) / 2 + col;
}

// Raw embedding. Components are finite and dim > 0.
class FeatureVector {
 public:
  explicit FeatureVector(std::vector<double> components);

  std::size_t dim() const { return components_.size(); }
  std::span<const double> values() const { return components_; }
  double norm() const;

 private:
  std::vector<double> components_;
};

// Embedding with unit l2 norm (to 1e-6).
class NormalizedFeature {
 public:
  // Wraps components that are already unit length; throws InvalidArgument
  // otherwise.
  static NormalizedFeature from_unit(std::vector<double> components);

  std::size_t dim() const { return components_.size(); }
  std::span<const double> values() const { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

 private:
  explicit NormalizedFeature(std::vector<double> components)
      : components_(std::move(components)) {}

  std::vector<double> components_;
};

// Norms at or below this are treated as degenerate.
inline constexpr double kMinNorm = 1e-12;

// Throws ZeroVector when the norm is <= kMinNorm.
NormalizedFeature normalize(const FeatureVector& v);
NormalizedFeature normalize(std::span<const double> v);

// Cholesky factor L of (Sigma + epsilon I), packed row-major lower.
struct CholeskyFactor {
  std::size_t dim = 0;
  double epsilon_scale = 0.0;
  double epsilon = 0.0;
  std::vector<double> lower;
  double logdet = 0.0;
};

// Mean and covariance of a model's sample features.
//
// The covariance is held as a packed lower triangle, so it is symmetric by
// construction. Cached samples, when present, are float32 rows.
class ModelStatistics {
 public:
  ModelStatistics(std::string model_id, std::vector<double> mean,
                  std::vector<double> packed_covariance,
                  std::uint64_t sample_count, std::vector<float> samples = {});

  const std::string& model_id() const { return model_id_; }
  std::size_t dim() const { return mean_.size(); }
  std::span<const double> mean() const { return mean_; }
  std::span<const double> covariance_packed() const { return covariance_; }
  double covariance(std::size_t row, std::size_t col) const {
    return row >= col ? covariance_[packed_index(row, col)]
                      : covariance_[packed_index(col, row)];
  }
  std::uint64_t sample_count() const { return sample_count_; }

  bool has_samples() const { return !samples_.empty(); }
  std::span<const float> samples() const { return samples_; }
  // Number of cached sample rows (0 when samples are not retained).
  std::size_t cached_sample_rows() const {
    return samples_.size() / mean_.size();
  }

  const std::optional<CholeskyFactor>& cached_cholesky() const {
    return cholesky_;
  }
  // Attaches a factor computed from this object's covariance.
  void set_cached_cholesky(CholeskyFactor factor);
  void clear_cached_cholesky() { cholesky_.reset(); }

  // Same statistics without cached samples or factor.
  ModelStatistics without_samples() const;
  ModelStatistics renamed(std::string model_id) const;

 private:
  std::string model_id_;
  std::vector<double> mean_;
  std::vector<double> covariance_;
  std::uint64_t sample_count_;
  std::vector<float> samples_;
  std::optional<CholeskyFactor> cholesky_;
};

struct MomentOptions {
  bool keep_samples = false;
  bool normalize = true;
};

// Mean and biased (1/N) covariance of the (normalized) samples. Rows are put
// in lexicographic order before accumulation, and sums are formed pairwise,
// so the result does not depend on input order.
ModelStatistics compute_moments(std::string model_id,
                                std::span<const FeatureVector> samples,
                                const MomentOptions& options = {});

// Same, over `rows` float32 values laid out row-major with `dim` columns.
ModelStatistics compute_moments(std::string model_id,
                                std::span<const float> rows, std::size_t dim,
                                const MomentOptions& options = {});

// Default relative regularizer for (Sigma + epsilon I).
inline constexpr double kDefaultEpsilonScale = 1e-4;
inline constexpr double kEpsilonFloor = 1e-12;

// epsilon = max(epsilon_scale * mean(diag Sigma), 1e-12).
double regularizer(const ModelStatistics& stats, double epsilon_scale);

// Factorizes Sigma + epsilon I without touching `stats`.
CholeskyFactor compute_regularized_cholesky(const ModelStatistics& stats,
                                            double epsilon_scale);

// Returns the cached factor when it was computed with `epsilon_scale`,
// otherwise computes it and caches it on `stats`.
const CholeskyFactor& regularized_cholesky(ModelStatistics& stats,
                                           double epsilon_scale);

// Rounds mean, covariance and samples to float32 precision (the on-disk
// representation) and drops any cached factor.
ModelStatistics quantize_to_storage(const ModelStatistics& stats);

}  // namespace modelsearch

#endif  // MODELSEARCH_FEATURE_STATS_H_
