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

// Query-to-model scoring rules and the model-to-model Frechet distance.
//
// A model is treated as a distribution over unit-norm image features. Given a
// unit query q, each rule estimates (a monotone surrogate of) the likelihood
// of q under the model:
//
//   monte_carlo          log mean_i exp(z_i . q / tau) over cached samples
//   first_moment         mu~ . q, where mu~ = mu / ||mu||
//   first_second_moment  q^T Sigma q / (2 tau) + mu . q
//   gaussian_density     log N(q; mu, Sigma + eps I)
//
// Scores are comparable across models only for the same rule and query.

#ifndef MODELSEARCH_SCORING_H_
#define MODELSEARCH_SCORING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modelsearch/feature_stats.h"

namespace modelsearch {

// CLIP's learned logit scale is 100.
inline constexpr double kDefaultTau = 0.01;

enum class MethodKind {
  kMonteCarlo,
  kFirstMoment,
  kFirstSecondMoment,
  kGaussianDensity,
  // Model-to-model only; valid for a single model-id query.
  kFrechet,
};

std::string_view method_name(MethodKind kind);
std::optional<MethodKind> parse_method_name(std::string_view name);

struct ScoreMethod {
  MethodKind kind = MethodKind::kFirstMoment;
  // Monte-Carlo: number of leading cached samples to average over.
  std::size_t sample_count = 0;
  // Temperature. first_moment ignores it except when fusing queries.
  double tau = kDefaultTau;
  double epsilon_scale = kDefaultEpsilonScale;

  static ScoreMethod monte_carlo(std::size_t sample_count,
                                 double tau = kDefaultTau);
  static ScoreMethod first_moment(double tau = kDefaultTau);
  static ScoreMethod first_second_moment(double tau = kDefaultTau);
  static ScoreMethod gaussian_density(
      double epsilon_scale = kDefaultEpsilonScale);
  static ScoreMethod frechet();

  std::string_view name() const { return method_name(kind); }
  // Throws InvalidArgument on tau <= 0, negative epsilon_scale, or a zero
  // Monte-Carlo sample count.
  void validate() const;
};

// log N(q; mu, Sigma + eps I) with the standard (2 pi)^{-d/2} normalizer.
// Uses the factor cached on `stats` when it matches `epsilon_scale`.
double gaussian_log_density(const NormalizedFeature& query,
                            const ModelStatistics& stats,
                            double epsilon_scale = kDefaultEpsilonScale);
// Same density at an arbitrary point (not necessarily unit length).
double gaussian_log_density(std::span<const double> point,
                            const ModelStatistics& stats,
                            double epsilon_scale = kDefaultEpsilonScale);

double monte_carlo_score(const NormalizedFeature& query,
                         const ModelStatistics& stats,
                         std::size_t sample_count, double tau = kDefaultTau);

// Log of the sample average of exp(row . q / tau) over a row-major matrix.
// This is the estimator behind monte_carlo_score, usable on any samples.
double log_mean_exp_score(std::span<const double> rows, std::size_t dim,
                          std::span<const double> query, double tau);

double first_moment_score(const NormalizedFeature& query,
                          const ModelStatistics& stats);

// Ranking form (1/(2 tau)) q^T Sigma q + mu^T q with the raw mean mu.
double first_second_moment_score(const NormalizedFeature& query,
                                 const ModelStatistics& stats,
                                 double tau = kDefaultTau);

// Log of the closed-form expectation E[exp(z . q / tau)] for z ~ N(mu, Sigma):
// (1/(2 tau^2)) q^T Sigma q + (1/tau) mu^T q.
double moment_generating_log_expectation(std::span<const double> query,
                                         const ModelStatistics& stats,
                                         double tau);

// Dispatches on method.kind (not kFrechet).
double score_model(const NormalizedFeature& query, const ModelStatistics& stats,
                   const ScoreMethod& method);

// Maps a score to the log-likelihood scale used for fusion: cosine-family
// scores (first_moment, first_second_moment) are divided by tau;
// gaussian_density and monte_carlo are already log-likelihoods.
double log_likelihood_surrogate(double score, const ScoreMethod& method);

struct WeightedScores {
  std::vector<double> log_scores;
  double weight = 1.0;
};

// Product of experts: fused[m] = sum_j weight_j * log_scores_j[m]. The
// normalizing constant is shared by all models and is not applied.
std::vector<double> poe_combine(std::span<const WeightedScores> per_query);

// Tolerances of the Frechet matrix square root.
inline constexpr double kFrechetClampRelative = 1e-10;
inline constexpr double kFrechetResidualLimit = 1e-3;

// ||mu_a - mu_b||^2 + Tr(Sigma_a + Sigma_b - 2 (Sigma_a Sigma_b)^{1/2}).
double frechet_distance(const ModelStatistics& a, const ModelStatistics& b);

// Per-model operand for repeated Frechet evaluations: the dense covariance
// and its symmetric square root.
class FrechetOperand {
 public:
  explicit FrechetOperand(const ModelStatistics& stats);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const std::string& model_id() const { return model_id_; }

 private:
  friend double frechet_distance(const FrechetOperand& a,
                                 const FrechetOperand& b);

  std::string model_id_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd sqrt_covariance_;
  double trace_ = 0.0;
};

double frechet_distance(const FrechetOperand& a, const FrechetOperand& b);

}  // namespace modelsearch

#endif  // MODELSEARCH_SCORING_H_
