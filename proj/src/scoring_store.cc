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

#include "modelsearch/scoring_store.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "modelsearch/error.h"
#include "modelsearch/kernels.h"

namespace modelsearch {

std::size_t store_record_floats(const ScoreMethod& method, std::size_t dim) {
  switch (method.kind) {
    case MethodKind::kFirstMoment:
      return dim;
    case MethodKind::kFirstSecondMoment:
    case MethodKind::kGaussianDensity:
      return dim + packed_size(dim);
    case MethodKind::kMonteCarlo:
      return method.sample_count * dim;
    case MethodKind::kFrechet:
      break;
  }
  throw Error(ErrorCode::kMethodUnavailable,
              "frechet is a model-to-model distance and has no query store");
}

void score_store_records(const ScoreMethod& method, std::size_t dim,
                         const float* records, const double* logdets,
                         std::size_t count, std::span<const double> query,
                         double* out) {
  const std::size_t stride = store_record_floats(method, dim);
  const double* q = query.data();
  switch (method.kind) {
    case MethodKind::kFirstMoment:
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::clamp(kernels::dot(records + i * stride, q, dim), -1.0, 1.0);
      }
      break;
    case MethodKind::kFirstSecondMoment: {
      const double half_inv_tau = 0.5 / method.tau;
      for (std::size_t i = 0; i < count; ++i) {
        const float* record = records + i * stride;
        out[i] = half_inv_tau * kernels::packed_quadratic_form(record + dim, q, dim) +
                 kernels::dot(record, q, dim);
      }
      break;
    }
    case MethodKind::kGaussianDensity: {
      const double base = static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
      std::vector<double> centered(dim);
      std::vector<double> work(dim);
      for (std::size_t i = 0; i < count; ++i) {
        const float* record = records + i * stride;
        for (std::size_t j = 0; j < dim; ++j) {
          centered[j] = q[j] - static_cast<double>(record[j]);
        }
        const double mahalanobis = kernels::forward_solve_squared_norm(
            record + dim, centered.data(), work.data(), dim);
        out[i] = -0.5 * (base + logdets[i] + mahalanobis);
      }
      break;
    }
    case MethodKind::kMonteCarlo:
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = kernels::log_mean_exp_dot(records + i * stride,
                                           method.sample_count, dim, q,
                                           method.tau);
      }
      break;
    case MethodKind::kFrechet:
      break;
  }
}

double make_store_record(const ScoreMethod& method, const ModelStatistics& stats,
                         std::span<float> record) {
  const std::size_t dim = stats.dim();
  if (record.size() != store_record_floats(method, dim)) {
    throw Error(ErrorCode::kLengthMismatch, "store record has the wrong size");
  }
  const auto mean = stats.mean();
  switch (method.kind) {
    case MethodKind::kFirstMoment: {
      double norm_sq = 0.0;
      for (double x : mean) norm_sq += x * x;
      const double norm = std::sqrt(norm_sq);
      if (!(norm > kMinNorm)) {
        throw Error(ErrorCode::kDegenerateMean,
                    "model '" + stats.model_id() + "' has a zero mean");
      }
      for (std::size_t j = 0; j < dim; ++j) {
        record[j] = static_cast<float>(mean[j] / norm);
      }
      return 0.0;
    }
    case MethodKind::kFirstSecondMoment: {
      std::copy(mean.begin(), mean.end(), record.begin());
      const auto cov = stats.covariance_packed();
      std::copy(cov.begin(), cov.end(), record.begin() + static_cast<std::ptrdiff_t>(dim));
      return 0.0;
    }
    case MethodKind::kGaussianDensity: {
      const auto& cached = stats.cached_cholesky();
      std::optional<CholeskyFactor> fresh;
      if (!cached || cached->epsilon_scale != method.epsilon_scale) {
        fresh = compute_regularized_cholesky(stats, method.epsilon_scale);
      }
      const CholeskyFactor& factor = fresh ? *fresh : *cached;
      std::copy(mean.begin(), mean.end(), record.begin());
      std::copy(factor.lower.begin(), factor.lower.end(),
                record.begin() + static_cast<std::ptrdiff_t>(dim));
      // The stored factor is rounded; its log-det must match it.
      double logdet = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        logdet += std::log(static_cast<double>(record[dim + packed_index(j, j)]));
      }
      return 2.0 * logdet;
    }
    case MethodKind::kMonteCarlo: {
      if (stats.cached_sample_rows() < method.sample_count) {
        throw Error(ErrorCode::kSamplesUnavailable,
                    "model '" + stats.model_id() + "' caches " +
                        std::to_string(stats.cached_sample_rows()) +
                        " samples, " + std::to_string(method.sample_count) +
                        " requested");
      }
      const auto samples = stats.samples();
      std::copy(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(record.size()),
                record.begin());
      return 0.0;
    }
    case MethodKind::kFrechet:
      break;
  }
  return 0.0;
}

ScoringStore::ScoringStore(ScoreMethod method, std::size_t dim)
    : method_(method), dim_(dim) {
  method_.validate();
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "store dim must be >= 1");
  record_floats_ = store_record_floats(method_, dim_);
}

std::size_t ScoringStore::bytes() const {
  return records_.capacity() * sizeof(float) +
         logdets_.capacity() * sizeof(double);
}

void ScoringStore::reserve(std::size_t models) {
  records_.reserve(models * record_floats_);
  if (method_.kind == MethodKind::kGaussianDensity) logdets_.reserve(models);
}

void ScoringStore::add(const ModelStatistics& stats) {
  if (stats.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model '" + stats.model_id() + "' has dim " +
                    std::to_string(stats.dim()) + ", store dim is " +
                    std::to_string(dim_));
  }
  const std::size_t offset = records_.size();
  records_.resize(offset + record_floats_);
  try {
    const double logdet = make_store_record(
        method_, stats, std::span<float>(records_.data() + offset, record_floats_));
    if (method_.kind == MethodKind::kGaussianDensity) logdets_.push_back(logdet);
  } catch (...) {
    records_.resize(offset);
    throw;
  }
  ++count_;
}

void ScoringStore::add_record(std::span<const float> record, double logdet) {
  if (record.size() != record_floats_) {
    throw Error(ErrorCode::kLengthMismatch, "store record has the wrong size");
  }
  records_.insert(records_.end(), record.begin(), record.end());
  if (method_.kind == MethodKind::kGaussianDensity) logdets_.push_back(logdet);
  ++count_;
}

void ScoringStore::score(std::span<const double> query,
                         std::span<double> out) const {
  if (query.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query dim " + std::to_string(query.size()) +
                    " does not match store dim " + std::to_string(dim_));
  }
  if (out.size() != count_) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(out.size()) + " outputs for " +
                    std::to_string(count_) + " models");
  }
  score_store_records(method_, dim_, records_.data(), logdets_.data(), count_,
                      query, out.data());
}

}  // namespace modelsearch
