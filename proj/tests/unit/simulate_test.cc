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

#include <cmath>

#include "modelsearch/simulate.h"
#include "test_util.h"

namespace modelsearch {
namespace {

bool same(const ModelStatistics& a, const ModelStatistics& b) {
  return a.model_id() == b.model_id() &&
         std::equal(a.mean().begin(), a.mean().end(), b.mean().begin(), b.mean().end()) &&
         std::equal(a.covariance_packed().begin(), a.covariance_packed().end(),
                    b.covariance_packed().begin(), b.covariance_packed().end());
}

TEST_CASE("zero amplitude gives identity covariances and unit means") {
  for (const auto& m : simulate_models(20, 7, 0.0, 3)) {
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) CHECK(m.covariance(i, j) == (i == j ? 1.0 : 0.0));
    }
    double norm = 0.0;
    for (double x : m.mean()) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const auto a = simulate_models(15, 9, 0.01, 42);
  const auto b = simulate_models(15, 9, 0.01, 42);
  const auto c = simulate_models(15, 9, 0.01, 43);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(same(a[i], b[i]));
    CHECK_FALSE(same(a[i], c[i]));
  }
  CHECK(a[3].model_id() == simulated_model_id(3));
}

TEST_CASE("models do not depend on how many are generated") {
  const auto few = simulate_models(3, 6, 0.02, 8);
  const auto many = simulate_models(10, 6, 0.02, 8);
  for (std::size_t i = 0; i < few.size(); ++i) CHECK(same(few[i], many[i]));
  CHECK(same(simulate_model(8, 7, 6, 0.02), many[7]));
}

TEST_CASE("high-dimensional noisy identities stay near the identity") {
  // Equivalent to one simulate_models(1000, 512, 0.01) call, one model at a time.
  const std::size_t dim = 512;
  std::size_t out_of_range = 0;
  for (std::size_t index = 0; index < 1000; ++index) {
    const ModelStatistics m = simulate_model(17, index, dim, 0.01);
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = m.covariance(i, i);
      if (d < 0.99 || d > 1.01) ++out_of_range;
      CHECK(m.covariance(i, (i + 1) % dim) == m.covariance((i + 1) % dim, i));
    }
  }
  CHECK(out_of_range == 0);
}

TEST_CASE("simulation argument errors") {
  CHECK_ERROR_CODE(simulate_models(1, 2, 1.0, 0), ErrorCode::kInvalidAmplitude);
  CHECK_ERROR_CODE(simulate_models(1, 2, -0.1, 0), ErrorCode::kInvalidAmplitude);
  CHECK_ERROR_CODE(simulate_models(0, 2, 0.1, 0), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(simulate_clustered_zoo(3, 2, 2, 1.9, 0.05, 0),
                   ErrorCode::kSeparationInfeasible);
  CHECK_ERROR_CODE(simulate_clustered_zoo(0, 2, 8, 0.5, 0.05, 0),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(simulate_clustered_zoo(2, 2, 8, 0.5, 0.0, 0),
                   ErrorCode::kInvalidArgument);
}

TEST_CASE("clustered zoo layout") {
  const ClusteredZoo single = simulate_clustered_zoo(1, 6, 16, 0.5, 0.05, 2);
  REQUIRE(single.labels.size() == 6);
  for (const auto& l : single.labels) CHECK(l == single.labels.front());

  const ClusteredZoo zoo = simulate_clustered_zoo(4, 3, 32, 0.5, 0.05, 2);
  REQUIRE(zoo.models.size() == 12);
  CHECK(zoo.labels[0] == zoo.labels[2]);
  CHECK(zoo.labels[2] != zoo.labels[3]);
  for (const auto& m : zoo.models) {
    double norm = 0.0;
    for (double x : m.mean()) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
    CHECK(m.covariance(0, 1) == 0.0);
    CHECK(m.covariance(0, 0) > 0.0);
  }
  const ClusteredZoo again = simulate_clustered_zoo(4, 3, 32, 0.5, 0.05, 2);
  for (std::size_t i = 0; i < zoo.models.size(); ++i) CHECK(same(zoo.models[i], again.models[i]));
}

TEST_CASE("gaussian draws follow the generator") {
  Rng rng(3);
  const ModelStatistics gen = testing::make_stats(
      "g", {0.5, -0.25, 0.1}, testing::random_psd(rng, 3, 0.2));
  const std::size_t n = 100000;
  const std::vector<double> rows = draw_gaussian_samples(gen, n, 4, 0);
  REQUIRE(rows.size() == n * 3);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += rows[r * 3 + c];
    mean /= static_cast<double>(n);
    const double sd = std::sqrt(gen.covariance(c, c) / static_cast<double>(n));
    CHECK(std::abs(mean - gen.mean()[c]) <= 4.0 * sd);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += std::pow(rows[r * 3 + c] - mean, 2.0);
    var /= static_cast<double>(n);
    CHECK(var == doctest::Approx(gen.covariance(c, c)).epsilon(0.03));
  }
}

TEST_CASE("draw streams are independent and reproducible") {
  const ModelStatistics gen = testing::isotropic("g", {0.0, 0.0}, 1.0);
  const auto a = draw_gaussian_samples(gen, 50, 1, 0);
  const auto b = draw_gaussian_samples(gen, 50, 1, 1);
  const auto a2 = draw_gaussian_samples(gen, 50, 1, 0);
  CHECK(a == a2);
  CHECK(a != b);
  const auto f = draw_gaussian_sample_rows(gen, 50, 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(f[i] == static_cast<float>(a[i]));
  Rng s0 = Rng::for_stream(1, 0);
  Rng s1 = Rng::for_stream(1, 1);
  CHECK(s0.next_u64() != s1.next_u64());
}

}  // namespace
}  // namespace modelsearch
