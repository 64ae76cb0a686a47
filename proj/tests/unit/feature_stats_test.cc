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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "modelsearch/feature_stats.h"
#include "test_util.h"

namespace modelsearch {
namespace {

using testing::make_stats;
using testing::pack_lower;
using testing::random_psd;
using testing::unpack;

TEST_CASE("normalize scales to unit length") {
  const NormalizedFeature f = normalize(FeatureVector({3.0, 4.0}));
  CHECK(f[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(0.8).epsilon(1e-15));

  const NormalizedFeature e1 = normalize(std::vector<double>{1.0, 0.0, 0.0});
  CHECK(e1[0] == 1.0);
  CHECK(e1[1] == 0.0);
}

TEST_CASE("normalize rejects degenerate vectors") {
  CHECK_ERROR_CODE(normalize(FeatureVector({0.0, 0.0})), ErrorCode::kZeroVector);
  CHECK_ERROR_CODE(normalize(std::vector<double>{1e-13, 0.0}),
                   ErrorCode::kZeroVector);
}

TEST_CASE("normalize preserves direction") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(7);
    for (double& x : v) x = rng.uniform(-5.0, 5.0);
    const NormalizedFeature f = normalize(v);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    double unit = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(f[i] == doctest::Approx(v[i] / norm).epsilon(1e-12));
      unit += f[i] * f[i];
    }
    CHECK(std::abs(std::sqrt(unit) - 1.0) <= 1e-12);
  }
}

TEST_CASE("feature vectors must be finite and non-empty") {
  CHECK_ERROR_CODE(FeatureVector({}), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(FeatureVector({1.0, std::numeric_limits<double>::quiet_NaN()}),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(FeatureVector({std::numeric_limits<double>::infinity()}),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(NormalizedFeature::from_unit({0.5, 0.5}),
                   ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(NormalizedFeature::from_unit({0.6, 0.8}));
}

TEST_CASE("moments of a single sample") {
  const std::vector<FeatureVector> samples{FeatureVector({0.6, 0.8})};
  const ModelStatistics stats = compute_moments("one", samples);
  CHECK(stats.sample_count() == 1);
  CHECK(stats.mean()[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(stats.mean()[1] == doctest::Approx(0.8).epsilon(1e-15));
  for (double v : stats.covariance_packed()) CHECK(std::abs(v) < 1e-16);
}

TEST_CASE("moments of two basis vectors") {
  const std::vector<FeatureVector> samples{FeatureVector({1.0, 0.0}),
                                           FeatureVector({0.0, 1.0})};
  const ModelStatistics stats = compute_moments("two", samples);
  CHECK(stats.mean()[0] == 0.5);
  CHECK(stats.mean()[1] == 0.5);
  CHECK(stats.covariance(0, 0) == 0.25);
  CHECK(stats.covariance(1, 1) == 0.25);
  CHECK(stats.covariance(0, 1) == -0.25);
  CHECK(stats.covariance(1, 0) == -0.25);
}

TEST_CASE("moment computation errors") {
  const std::vector<FeatureVector> none;
  CHECK_ERROR_CODE(compute_moments("empty", none), ErrorCode::kEmptySampleSet);
  const std::vector<FeatureVector> mixed{FeatureVector({1.0, 0.0}),
                                         FeatureVector({1.0, 0.0, 0.0})};
  CHECK_ERROR_CODE(compute_moments("mixed", mixed), ErrorCode::kDimensionMismatch);
  const std::vector<float> rows{1.0f, 0.0f, 0.0f};
  CHECK_ERROR_CODE(compute_moments("ragged", rows, 2), ErrorCode::kDimensionMismatch);
  const std::vector<float> zero_row{0.0f, 0.0f};
  CHECK_ERROR_CODE(compute_moments("zero", zero_row, 2), ErrorCode::kZeroVector);
}

std::vector<FeatureVector> random_samples(Rng& rng, std::size_t count, std::size_t dim) {
  std::vector<FeatureVector> samples;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal() + 0.5;
    samples.emplace_back(std::move(v));
  }
  return samples;
}

TEST_CASE("moments match a direct reconstruction") {
  Rng rng(11);
  const std::size_t dim = 6;
  const auto samples = random_samples(rng, 700, dim);
  const ModelStatistics stats = compute_moments("m", samples);

  Eigen::MatrixXd z(static_cast<Eigen::Index>(samples.size()), dim);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto v = samples[r].values();
    const double n = samples[r].norm();
    for (std::size_t c = 0; c < dim; ++c) z(static_cast<Eigen::Index>(r), c) = v[c] / n;
  }
  const Eigen::VectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd centered = z.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < dim; ++i) {
    CHECK(std::abs(stats.mean()[i] - mean(static_cast<Eigen::Index>(i))) <= 1e-9);
    for (std::size_t j = 0; j <= i; ++j) {
      CHECK(std::abs(stats.covariance(i, j) - cov(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j))) <= 1e-9);
    }
  }
  double norm = 0.0;
  for (double m : stats.mean()) norm += m * m;
  CHECK(std::sqrt(norm) <= 1.0);
}

TEST_CASE("moments do not depend on sample order") {
  Rng rng(5);
  auto samples = random_samples(rng, 1000, 9);
  const ModelStatistics reference = compute_moments("m", samples);
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = samples.size(); i > 1; --i) {
      std::swap(samples[i - 1], samples[rng.below(i)]);
    }
    const ModelStatistics shuffled = compute_moments("m", samples);
    CHECK(std::equal(reference.mean().begin(), reference.mean().end(),
                     shuffled.mean().begin()));
    CHECK(std::equal(reference.covariance_packed().begin(),
                     reference.covariance_packed().end(),
                     shuffled.covariance_packed().begin()));
  }
}

TEST_CASE("float rows and feature vectors give the same moments") {
  Rng rng(8);
  std::vector<float> rows(300 * 4);
  for (float& x : rows) x = static_cast<float>(rng.normal());
  std::vector<FeatureVector> vectors;
  for (std::size_t r = 0; r < 300; ++r) {
    vectors.emplace_back(std::vector<double>(rows.begin() + r * 4, rows.begin() + r * 4 + 4));
  }
  const ModelStatistics a = compute_moments("m", rows, 4);
  const ModelStatistics b = compute_moments("m", vectors);
  CHECK(std::equal(a.mean().begin(), a.mean().end(), b.mean().begin()));
  CHECK(std::equal(a.covariance_packed().begin(), a.covariance_packed().end(),
                   b.covariance_packed().begin()));
}

TEST_CASE("samples are kept only on request and are unit rows") {
  Rng rng(2);
  const auto samples = random_samples(rng, 20, 3);
  CHECK_FALSE(compute_moments("m", samples).has_samples());
  const ModelStatistics kept = compute_moments("m", samples, {.keep_samples = true});
  REQUIRE(kept.cached_sample_rows() == 20);
  for (std::size_t r = 0; r < 20; ++r) {
    double norm = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double x = kept.samples()[r * 3 + c];
      norm += x * x;
    }
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);
  }
}

TEST_CASE("normalization can be switched off") {
  const std::vector<FeatureVector> samples{FeatureVector({2.0, 0.0}),
                                           FeatureVector({0.0, 2.0})};
  const ModelStatistics stats = compute_moments("raw", samples, {.normalize = false});
  CHECK(stats.mean()[0] == 1.0);
  CHECK(stats.covariance(0, 0) == 1.0);
}

TEST_CASE("cholesky of the identity") {
  ModelStatistics stats = make_stats("i", {0.0, 0.0}, Eigen::MatrixXd::Identity(2, 2));
  const CholeskyFactor& f = regularized_cholesky(stats, 0.0);
  CHECK(f.lower[packed_index(0, 0)] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.lower[packed_index(1, 0)] == 0.0);
  CHECK(f.lower[packed_index(1, 1)] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(f.logdet) < 1e-11);
  CHECK(f.epsilon == kEpsilonFloor);
}

TEST_CASE("cholesky log-determinant of a diagonal covariance") {
  ModelStatistics stats =
      make_stats("d", {0.0, 0.0}, Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix());
  CHECK(regularized_cholesky(stats, 0.0).logdet ==
        doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("zero covariance falls back to the absolute floor") {
  ModelStatistics stats = make_stats("z", {0.0, 0.0, 0.0}, Eigen::MatrixXd::Zero(3, 3));
  const CholeskyFactor& f = regularized_cholesky(stats, 1e-4);
  CHECK(f.epsilon == kEpsilonFloor);
  // Dense eigenvalue oracle for Sigma + eps I.
  const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(3, 3) * f.epsilon;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shifted);
  const double oracle = solver.eigenvalues().array().log().sum();
  CHECK(f.logdet == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(f.logdet == doctest::Approx(3.0 * std::log(1e-12)).epsilon(1e-12));
}

TEST_CASE("regularizer scales with the mean variance") {
  const ModelStatistics stats =
      make_stats("d", {0.0, 0.0}, Eigen::Vector2d(2.0, 4.0).asDiagonal().toDenseMatrix());
  CHECK(regularizer(stats, 1e-4) == doctest::Approx(3e-4).epsilon(1e-12));
  CHECK(regularizer(stats, 0.0) == kEpsilonFloor);
}

TEST_CASE("cholesky reconstructs the regularized covariance") {
  Rng rng(21);
  for (std::size_t dim : {2, 8, 64, 512}) {
    CAPTURE(dim);
    const Eigen::MatrixXd sigma = random_psd(rng, dim, 0.01, dim / 2 + 1);
    ModelStatistics stats = make_stats("r", std::vector<double>(dim, 0.0), sigma);
    const CholeskyFactor& f = regularized_cholesky(stats, kDefaultEpsilonScale);
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            f.lower[packed_index(i, j)];
      }
    }
    const Eigen::MatrixXd target = unpack(stats) + f.epsilon * Eigen::MatrixXd::Identity(n, n);
    const double rel = (lower * lower.transpose() - target).norm() / target.norm();
    CHECK(rel <= 1e-7);
  }
}

TEST_CASE("cached factor agrees with recomputation and is reused") {
  Rng rng(4);
  ModelStatistics stats = make_stats("c", std::vector<double>(16, 0.0), random_psd(rng, 16));
  CHECK_FALSE(stats.cached_cholesky().has_value());
  const CholeskyFactor first = regularized_cholesky(stats, 1e-3);
  REQUIRE(stats.cached_cholesky().has_value());
  const CholeskyFactor fresh = compute_regularized_cholesky(stats, 1e-3);
  CHECK(std::abs(fresh.logdet - first.logdet) <= 1e-9);
  for (std::size_t i = 0; i < fresh.lower.size(); ++i) {
    CHECK(std::abs(fresh.lower[i] - first.lower[i]) <= 1e-9);
  }
  // A different scale replaces the cache.
  const CholeskyFactor& other = regularized_cholesky(stats, 0.5);
  CHECK(other.epsilon_scale == 0.5);
  CHECK(stats.cached_cholesky()->epsilon_scale == 0.5);
}

TEST_CASE("indefinite covariance is rejected") {
  ModelStatistics stats =
      make_stats("bad", {0.0, 0.0}, Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix());
  CHECK_ERROR_CODE(regularized_cholesky(stats, 0.0), ErrorCode::kNotPositiveDefinite);
}

TEST_CASE("statistics validation") {
  CHECK_ERROR_CODE(ModelStatistics("m", {}, {}, 1), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(ModelStatistics("m", {1.0, 0.0}, {1.0, 0.0}, 1),
                   ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(ModelStatistics("m", {1.0}, {1.0}, 0), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(ModelStatistics("m", {std::numeric_limits<double>::quiet_NaN()}, {1.0}, 1),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(ModelStatistics("m", {1.0}, {1.0}, 1, {1.0f, 0.0f}),
                   ErrorCode::kDimensionMismatch);
}

TEST_CASE("storage quantization rounds to float") {
  const ModelStatistics stats("q", {0.1, 0.2}, pack_lower(Eigen::MatrixXd::Identity(2, 2) * 0.3), 5);
  const ModelStatistics q = quantize_to_storage(stats);
  CHECK(q.mean()[0] == static_cast<double>(0.1f));
  CHECK(q.covariance(0, 0) == static_cast<double>(0.3f));
  CHECK(q.sample_count() == 5);
  CHECK(quantize_to_storage(q).mean()[1] == q.mean()[1]);
}

}  // namespace
}  // namespace modelsearch
