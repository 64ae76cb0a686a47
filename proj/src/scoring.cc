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

#include "modelsearch/scoring.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modelsearch/error.h"
#include "modelsearch/kernels.h"

namespace modelsearch {
namespace {

void check_dims(const NormalizedFeature& query, const ModelStatistics& stats) {
  if (query.dim() != stats.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query dim " + std::to_string(query.dim()) +
                    " does not match model '" + stats.model_id() + "' dim " +
                    std::to_string(stats.dim()));
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  }
}

// Symmetric square root with negative eigenvalues clamped to zero. Throws
// ComplexResidual when the clamped negative mass is not negligible.
struct ClampedSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

ClampedSpectrum clamped_spectrum(const Eigen::MatrixXd& symmetric,
                                 bool want_vectors, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      symmetric,
      want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kComplexResidual,
                "eigendecomposition failed for " + what);
  }
  Eigen::VectorXd values = solver.eigenvalues();
  const double largest = values.size() ? values.maxCoeff() : 0.0;
  const double tolerance = kFrechetClampRelative * std::max(largest, 0.0);
  const double trace = symmetric.trace();
  double negative_mass = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      if (values[i] < -tolerance) negative_mass += -values[i];
      values[i] = 0.0;
    }
  }
  if (negative_mass > kFrechetResidualLimit * std::max(trace, 0.0)) {
    throw Error(ErrorCode::kComplexResidual,
                "matrix square root of " + what +
                    " has significant negative spectrum (" +
                    std::to_string(negative_mass) + ")");
  }
  ClampedSpectrum out{std::move(values), {}};
  if (want_vectors) out.vectors = solver.eigenvectors();
  return out;
}

Eigen::MatrixXd dense_covariance(const ModelStatistics& stats) {
  const auto dim = static_cast<Eigen::Index>(stats.dim());
  Eigen::MatrixXd out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = stats.covariance(static_cast<std::size_t>(i),
                                        static_cast<std::size_t>(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace

std::string_view method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kMonteCarlo: return "monte_carlo";
    case MethodKind::kFirstMoment: return "first_moment";
    case MethodKind::kFirstSecondMoment: return "first_second_moment";
    case MethodKind::kGaussianDensity: return "gaussian_density";
    case MethodKind::kFrechet: return "frechet";
  }
  return "unknown";
}

std::optional<MethodKind> parse_method_name(std::string_view name) {
  for (MethodKind kind :
       {MethodKind::kMonteCarlo, MethodKind::kFirstMoment,
        MethodKind::kFirstSecondMoment, MethodKind::kGaussianDensity,
        MethodKind::kFrechet}) {
    if (method_name(kind) == name) return kind;
  }
  return std::nullopt;
}

ScoreMethod ScoreMethod::monte_carlo(std::size_t sample_count, double tau) {
  ScoreMethod m;
  m.kind = MethodKind::kMonteCarlo;
  m.sample_count = sample_count;
  m.tau = tau;
  return m;
}

ScoreMethod ScoreMethod::first_moment(double tau) {
  ScoreMethod m;
  m.kind = MethodKind::kFirstMoment;
  m.tau = tau;
  return m;
}

ScoreMethod ScoreMethod::first_second_moment(double tau) {
  ScoreMethod m;
  m.kind = MethodKind::kFirstSecondMoment;
  m.tau = tau;
  return m;
}

ScoreMethod ScoreMethod::gaussian_density(double epsilon_scale) {
  ScoreMethod m;
  m.kind = MethodKind::kGaussianDensity;
  m.epsilon_scale = epsilon_scale;
  return m;
}

ScoreMethod ScoreMethod::frechet() {
  ScoreMethod m;
  m.kind = MethodKind::kFrechet;
  return m;
}

void ScoreMethod::validate() const {
  check_tau(tau);
  if (!(epsilon_scale >= 0.0) || !std::isfinite(epsilon_scale)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_scale must be >= 0");
  }
  if (kind == MethodKind::kMonteCarlo && sample_count == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "monte_carlo needs a positive sample count");
  }
}

double gaussian_log_density(const NormalizedFeature& query,
                            const ModelStatistics& stats,
                            double epsilon_scale) {
  check_dims(query, stats);
  return gaussian_log_density(query.values(), stats, epsilon_scale);
}

double gaussian_log_density(std::span<const double> point,
                            const ModelStatistics& stats,
                            double epsilon_scale) {
  const std::size_t dim = stats.dim();
  if (point.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "point dim " + std::to_string(point.size()) +
                    " does not match model '" + stats.model_id() + "' dim " +
                    std::to_string(dim));
  }
  const auto& cached = stats.cached_cholesky();
  std::optional<CholeskyFactor> fresh;
  const CholeskyFactor* factor = nullptr;
  if (cached && cached->epsilon_scale == epsilon_scale) {
    factor = &*cached;
  } else {
    fresh = compute_regularized_cholesky(stats, epsilon_scale);
    factor = &*fresh;
  }
  std::vector<double> diff(dim);
  std::vector<double> work(dim);
  for (std::size_t i = 0; i < dim; ++i) diff[i] = point[i] - stats.mean()[i];
  const double mahalanobis = kernels::forward_solve_squared_norm(
      factor->lower.data(), diff.data(), work.data(), dim);
  return -0.5 * (static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) +
                 factor->logdet + mahalanobis);
}

double log_mean_exp_score(std::span<const double> rows, std::size_t dim,
                          std::span<const double> query, double tau) {
  check_tau(tau);
  if (dim == 0 || query.size() != dim || rows.size() % dim != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample matrix does not match query dim");
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptySampleSet, "no samples to average");
  }
  return kernels::log_mean_exp_dot(rows.data(), rows.size() / dim, dim,
                                   query.data(), tau);
}

double monte_carlo_score(const NormalizedFeature& query,
                         const ModelStatistics& stats,
                         std::size_t sample_count, double tau) {
  check_dims(query, stats);
  check_tau(tau);
  if (!stats.has_samples()) {
    throw Error(ErrorCode::kSamplesUnavailable,
                "model '" + stats.model_id() + "' has no cached samples");
  }
  if (sample_count == 0 || sample_count > stats.cached_sample_rows()) {
    throw Error(ErrorCode::kSamplesUnavailable,
                "model '" + stats.model_id() + "' caches " +
                    std::to_string(stats.cached_sample_rows()) +
                    " samples, " + std::to_string(sample_count) +
                    " requested");
  }
  return kernels::log_mean_exp_dot(stats.samples().data(), sample_count,
                                   stats.dim(), query.values().data(), tau);
}

double first_moment_score(const NormalizedFeature& query,
                          const ModelStatistics& stats) {
  check_dims(query, stats);
  double norm_sq = 0.0;
  for (double x : stats.mean()) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  if (!(norm > kMinNorm)) {
    throw Error(ErrorCode::kDegenerateMean,
                "model '" + stats.model_id() + "' has a zero mean");
  }
  const double cosine =
      kernels::dot(stats.mean(), query.values()) / norm;
  return std::clamp(cosine, -1.0, 1.0);
}

double first_second_moment_score(const NormalizedFeature& query,
                                 const ModelStatistics& stats, double tau) {
  check_dims(query, stats);
  check_tau(tau);
  const double quadratic = kernels::packed_quadratic_form(
      stats.covariance_packed().data(), query.values().data(), stats.dim());
  return quadratic / (2.0 * tau) + kernels::dot(stats.mean(), query.values());
}

double moment_generating_log_expectation(std::span<const double> query,
                                         const ModelStatistics& stats,
                                         double tau) {
  check_tau(tau);
  if (query.size() != stats.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim mismatch");
  }
  const double quadratic = kernels::packed_quadratic_form(
      stats.covariance_packed().data(), query.data(), stats.dim());
  return quadratic / (2.0 * tau * tau) + kernels::dot(stats.mean(), query) / tau;
}

double score_model(const NormalizedFeature& query, const ModelStatistics& stats,
                   const ScoreMethod& method) {
  switch (method.kind) {
    case MethodKind::kMonteCarlo:
      return monte_carlo_score(query, stats, method.sample_count, method.tau);
    case MethodKind::kFirstMoment:
      return first_moment_score(query, stats);
    case MethodKind::kFirstSecondMoment:
      return first_second_moment_score(query, stats, method.tau);
    case MethodKind::kGaussianDensity:
      return gaussian_log_density(query, stats, method.epsilon_scale);
    case MethodKind::kFrechet:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "frechet is a model-to-model distance, not a query score");
}

double log_likelihood_surrogate(double score, const ScoreMethod& method) {
  switch (method.kind) {
    case MethodKind::kFirstMoment:
    case MethodKind::kFirstSecondMoment:
      check_tau(method.tau);
      return score / method.tau;
    default:
      return score;
  }
}

std::vector<double> poe_combine(std::span<const WeightedScores> per_query) {
  if (per_query.empty()) {
    throw Error(ErrorCode::kEmptyQuerySet, "no query scores to combine");
  }
  const std::size_t models = per_query.front().log_scores.size();
  std::vector<double> fused(models, 0.0);
  for (const auto& query : per_query) {
    if (query.log_scores.size() != models) {
      throw Error(ErrorCode::kLengthMismatch,
                  "score lists cover different model counts");
    }
    if (!(query.weight > 0.0) || !std::isfinite(query.weight)) {
      throw Error(ErrorCode::kInvalidArgument, "query weights must be > 0");
    }
    for (std::size_t m = 0; m < models; ++m) {
      fused[m] += query.weight * query.log_scores[m];
    }
  }
  return fused;
}

FrechetOperand::FrechetOperand(const ModelStatistics& stats)
    : model_id_(stats.model_id()),
      mean_(Eigen::Map<const Eigen::VectorXd>(
          stats.mean().data(), static_cast<Eigen::Index>(stats.dim()))),
      sqrt_covariance_() {
  const Eigen::MatrixXd covariance = dense_covariance(stats);
  const ClampedSpectrum spectrum =
      clamped_spectrum(covariance, true, "covariance of '" + model_id_ + "'");
  sqrt_covariance_ = spectrum.vectors *
                     spectrum.values.cwiseSqrt().asDiagonal() *
                     spectrum.vectors.transpose();
  trace_ = covariance.trace();
}

double frechet_distance(const FrechetOperand& a, const FrechetOperand& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot compare '" + a.model_id_ + "' and '" + b.model_id_ +
                    "': dims differ");
  }
  // tr((A^1/2 B A^1/2)^1/2) is the nuclear norm of A^1/2 B^1/2. Singular
  // values avoid square roots of near-zero eigenvalues.
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(a.sqrt_covariance_ *
                                           b.sqrt_covariance_);
  const double trace_sqrt = svd.singularValues().sum();
  const double mean_term = (a.mean_ - b.mean_).squaredNorm();
  return std::max(0.0, mean_term + a.trace_ + b.trace_ - 2.0 * trace_sqrt);
}

double frechet_distance(const ModelStatistics& a, const ModelStatistics& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot compare '" + a.model_id() + "' and '" + b.model_id() +
                    "': dims differ");
  }
  return frechet_distance(FrechetOperand(a), FrechetOperand(b));
}

}  // namespace modelsearch
