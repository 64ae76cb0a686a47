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

#include "modelsearch/feature_stats.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "modelsearch/error.h"

namespace modelsearch {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows per leaf of the pairwise summation tree.
constexpr std::size_t kLeafRows = 256;

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void sum_rows(const RowMatrix& rows, std::size_t begin, std::size_t end,
              Eigen::VectorXd& out) {
  if (end - begin <= kLeafRows) {
    out.setZero(rows.cols());
    for (std::size_t r = begin; r < end; ++r) {
      out += rows.row(static_cast<Eigen::Index>(r)).transpose();
    }
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  Eigen::VectorXd right;
  sum_rows(rows, begin, mid, out);
  sum_rows(rows, mid, end, right);
  out += right;
}

// Lower triangle of sum over rows of r r^T.
void sum_outer_products(const RowMatrix& centered, std::size_t begin,
                        std::size_t end, Eigen::MatrixXd& out) {
  const auto dim = centered.cols();
  if (end - begin <= kLeafRows) {
    out.setZero(dim, dim);
    const auto block = centered.middleRows(static_cast<Eigen::Index>(begin),
                                           static_cast<Eigen::Index>(end - begin));
    out.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  Eigen::MatrixXd right;
  sum_outer_products(centered, begin, mid, out);
  sum_outer_products(centered, mid, end, right);
  out.triangularView<Eigen::Lower>() += right;
}

ModelStatistics moments_from_rows(std::string model_id, RowMatrix rows,
                                  const MomentOptions& options) {
  const auto count = static_cast<std::size_t>(rows.rows());
  const auto dim = static_cast<std::size_t>(rows.cols());

  if (options.normalize) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      const double norm = rows.row(r).norm();
      if (!(norm > kMinNorm)) {
        throw Error(ErrorCode::kZeroVector,
                    "sample " + std::to_string(r) + " of '" + model_id +
                        "' has zero norm");
      }
      rows.row(r) /= norm;
    }
  }

  std::vector<float> kept;
  if (options.keep_samples) {
    kept.resize(count * dim);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      kept[i] = static_cast<float>(rows.data()[i]);
    }
  }

  // Canonical (lexicographic) row order makes the sums order-independent.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = rows.data() + a * dim;
    const double* rb = rows.data() + b * dim;
    return std::lexicographical_compare(ra, ra + dim, rb, rb + dim);
  });
  RowMatrix sorted(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < count; ++i) {
    sorted.row(static_cast<Eigen::Index>(i)) =
        rows.row(static_cast<Eigen::Index>(order[i]));
  }
  rows.resize(0, 0);

  Eigen::VectorXd total;
  sum_rows(sorted, 0, count, total);
  const Eigen::VectorXd mean = total / static_cast<double>(count);

  sorted.rowwise() -= mean.transpose();
  Eigen::MatrixXd scatter;
  sum_outer_products(sorted, 0, count, scatter);

  std::vector<double> packed(packed_size(dim));
  const double inv_count = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      packed[packed_index(i, j)] =
          scatter(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
          inv_count;
    }
  }
  return ModelStatistics(std::move(model_id),
                         std::vector<double>(mean.data(), mean.data() + dim),
                         std::move(packed), count, std::move(kept));
}

}  // namespace

FeatureVector::FeatureVector(std::vector<double> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "feature vector has dim 0");
  }
  for (double x : components_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature vector has a non-finite component");
    }
  }
}

double FeatureVector::norm() const { return l2_norm(components_); }

NormalizedFeature NormalizedFeature::from_unit(std::vector<double> components) {
  if (components.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "feature vector has dim 0");
  }
  const double norm = l2_norm(components);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature is not unit length (norm " + std::to_string(norm) +
                    ")");
  }
  return NormalizedFeature(std::move(components));
}

NormalizedFeature normalize(std::span<const double> v) {
  return normalize(FeatureVector(std::vector<double>(v.begin(), v.end())));
}

NormalizedFeature normalize(const FeatureVector& v) {
  const double norm = v.norm();
  if (!(norm > kMinNorm)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  }
  std::vector<double> unit(v.values().begin(), v.values().end());
  for (double& x : unit) x /= norm;
  return NormalizedFeature::from_unit(std::move(unit));
}

ModelStatistics::ModelStatistics(std::string model_id, std::vector<double> mean,
                                 std::vector<double> packed_covariance,
                                 std::uint64_t sample_count,
                                 std::vector<float> samples)
    : model_id_(std::move(model_id)),
      mean_(std::move(mean)),
      covariance_(std::move(packed_covariance)),
      sample_count_(sample_count),
      samples_(std::move(samples)) {
  if (mean_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "statistics for '" + model_id_ + "' have dim 0");
  }
  if (covariance_.size() != packed_size(mean_.size())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "packed covariance for '" + model_id_ + "' has " +
                    std::to_string(covariance_.size()) + " entries, expected " +
                    std::to_string(packed_size(mean_.size())));
  }
  if (sample_count_ == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "statistics for '" + model_id_ + "' have sample_count 0");
  }
  if (!samples_.empty() && samples_.size() != sample_count_ * mean_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cached samples for '" + model_id_ +
                    "' do not match sample_count x dim");
  }
  for (double x : mean_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mean of '" + model_id_ + "' is not finite");
    }
  }
  for (double x : covariance_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariance of '" + model_id_ + "' is not finite");
    }
  }
}

void ModelStatistics::set_cached_cholesky(CholeskyFactor factor) {
  if (factor.dim != dim() || factor.lower.size() != packed_size(dim())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cholesky factor does not match statistics of '" + model_id_ +
                    "'");
  }
  cholesky_ = std::move(factor);
}

ModelStatistics ModelStatistics::without_samples() const {
  ModelStatistics copy(model_id_, mean_, covariance_, sample_count_);
  copy.cholesky_ = cholesky_;
  return copy;
}

ModelStatistics ModelStatistics::renamed(std::string model_id) const {
  ModelStatistics copy = *this;
  copy.model_id_ = std::move(model_id);
  return copy;
}

ModelStatistics compute_moments(std::string model_id,
                                std::span<const FeatureVector> samples,
                                const MomentOptions& options) {
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptySampleSet,
                "no samples for '" + model_id + "'");
  }
  const std::size_t dim = samples.front().dim();
  RowMatrix rows(static_cast<Eigen::Index>(samples.size()),
                 static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    if (samples[r].dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "sample " + std::to_string(r) + " of '" + model_id +
                      "' has dim " + std::to_string(samples[r].dim()) +
                      ", expected " + std::to_string(dim));
    }
    const auto values = samples[r].values();
    std::copy(values.begin(), values.end(), rows.data() + r * dim);
  }
  return moments_from_rows(std::move(model_id), std::move(rows), options);
}

ModelStatistics compute_moments(std::string model_id,
                                std::span<const float> rows, std::size_t dim,
                                const MomentOptions& options) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample dim is 0");
  }
  if (rows.size() % dim != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample buffer of '" + model_id + "' is not a multiple of dim");
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptySampleSet,
                "no samples for '" + model_id + "'");
  }
  RowMatrix matrix(static_cast<Eigen::Index>(rows.size() / dim),
                   static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample row " + std::to_string(i / dim) + " of '" + model_id +
                      "' has a non-finite component");
    }
    matrix.data()[i] = rows[i];
  }
  return moments_from_rows(std::move(model_id), std::move(matrix), options);
}

double regularizer(const ModelStatistics& stats, double epsilon_scale) {
  if (!(epsilon_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_scale must be >= 0");
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < stats.dim(); ++i) trace += stats.covariance(i, i);
  const double epsilon =
      epsilon_scale * trace / static_cast<double>(stats.dim());
  return std::max(epsilon, kEpsilonFloor);
}

CholeskyFactor compute_regularized_cholesky(const ModelStatistics& stats,
                                            double epsilon_scale) {
  const std::size_t dim = stats.dim();
  const double epsilon = regularizer(stats, epsilon_scale);
  Eigen::MatrixXd matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          stats.covariance(i, j);
    }
    matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
        epsilon;
  }
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(matrix);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "covariance of '" + stats.model_id() +
                    "' is not positive definite after regularization");
  }
  const Eigen::MatrixXd& factor = llt.matrixLLT();
  CholeskyFactor result;
  result.dim = dim;
  result.epsilon_scale = epsilon_scale;
  result.epsilon = epsilon;
  result.lower.resize(packed_size(dim));
  double logdet = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      result.lower[packed_index(i, j)] =
          factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double pivot = result.lower[packed_index(i, i)];
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "covariance of '" + stats.model_id() +
                      "' has a non-positive pivot after regularization");
    }
    logdet += std::log(pivot);
  }
  result.logdet = 2.0 * logdet;
  return result;
}

const CholeskyFactor& regularized_cholesky(ModelStatistics& stats,
                                           double epsilon_scale) {
  const auto& cached = stats.cached_cholesky();
  if (!cached || cached->epsilon_scale != epsilon_scale) {
    stats.set_cached_cholesky(
        compute_regularized_cholesky(stats, epsilon_scale));
  }
  return *stats.cached_cholesky();
}

ModelStatistics quantize_to_storage(const ModelStatistics& stats) {
  auto round = [](std::span<const double> values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = static_cast<double>(static_cast<float>(values[i]));
    }
    return out;
  };
  std::vector<float> samples(stats.samples().begin(), stats.samples().end());
  return ModelStatistics(stats.model_id(), round(stats.mean()),
                         round(stats.covariance_packed()), stats.sample_count(),
                         std::move(samples));
}

}  // namespace modelsearch
