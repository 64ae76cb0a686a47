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

#include "modelsearch/simulate.h"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "modelsearch/error.h"

namespace modelsearch {
namespace {

constexpr int kMaxCenterAttempts = 10000;

// Streams of the clustered zoo: centers, then one per model.
constexpr std::uint64_t kCenterStream = 0;

std::string zoo_model_id(std::size_t cluster, std::size_t member) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "zoo-c%02zu-m%02zu", cluster, member);
  return buf;
}

std::string cluster_label(std::size_t cluster) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cluster-%02zu", cluster);
  return buf;
}

}  // namespace

std::vector<double> simulate_unit_mean(Rng& rng, std::size_t dim) {
  std::vector<double> mean(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& x : mean) {
      x = rng.normal();
      norm_sq += x * x;
    }
  } while (!(norm_sq > 0.0));
  const double norm = std::sqrt(norm_sq);
  for (double& x : mean) x /= norm;
  return mean;
}

std::vector<double> simulate_noisy_identity(Rng& rng, std::size_t dim,
                                            double noise_amplitude) {
  std::vector<double> noise(dim * dim);
  for (double& x : noise) x = rng.uniform(-noise_amplitude, noise_amplitude);
  std::vector<double> packed(packed_size(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double symmetric = (noise[i * dim + j] + noise[j * dim + i]) / 2.0;
      packed[packed_index(i, j)] = (i == j ? 1.0 : 0.0) + symmetric;
    }
  }
  return packed;
}

std::string simulated_model_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sim-%07zu", index);
  return buf;
}

ModelStatistics simulate_model(std::uint64_t seed, std::size_t index,
                               std::size_t dim, double noise_amplitude) {
  Rng rng = Rng::for_stream(seed, index);
  std::vector<double> mean = simulate_unit_mean(rng, dim);
  std::vector<double> covariance =
      simulate_noisy_identity(rng, dim, noise_amplitude);
  return ModelStatistics(simulated_model_id(index), std::move(mean),
                         std::move(covariance), 1);
}

std::vector<ModelStatistics> simulate_models(std::size_t count, std::size_t dim,
                                             double noise_amplitude,
                                             std::uint64_t seed) {
  if (!(noise_amplitude >= 0.0 && noise_amplitude < 1.0)) {
    throw Error(ErrorCode::kInvalidAmplitude,
                "noise amplitude must be in [0, 1)");
  }
  if (count == 0 || dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "count and dim must be >= 1");
  }
  std::vector<ModelStatistics> models;
  models.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    models.push_back(simulate_model(seed, i, dim, noise_amplitude));
  }
  return models;
}

ClusteredZoo simulate_clustered_zoo(std::size_t clusters,
                                    std::size_t models_per_cluster,
                                    std::size_t dim, double separation,
                                    double within_sigma, std::uint64_t seed) {
  if (clusters == 0 || models_per_cluster == 0 || dim == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "clusters, models_per_cluster and dim must be >= 1");
  }
  if (!(separation > 0.0) || !(within_sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "separation and within_sigma must be positive");
  }

  Rng center_rng = Rng::for_stream(seed, kCenterStream);
  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < clusters; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxCenterAttempts && !placed; ++attempt) {
      std::vector<double> candidate = simulate_unit_mean(center_rng, dim);
      placed = true;
      for (const auto& other : centers) {
        double dist_sq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double d = candidate[i] - other[i];
          dist_sq += d * d;
        }
        if (std::sqrt(dist_sq) < separation) {
          placed = false;
          break;
        }
      }
      if (placed) centers.push_back(std::move(candidate));
    }
    if (!placed) {
      throw Error(ErrorCode::kSeparationInfeasible,
                  "could not place cluster " + std::to_string(c) +
                      " at separation " + std::to_string(separation));
    }
  }

  ClusteredZoo zoo;
  const double scale = within_sigma / std::sqrt(static_cast<double>(dim));
  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t m = 0; m < models_per_cluster; ++m) {
      Rng rng = Rng::for_stream(seed, 1 + c * models_per_cluster + m);
      std::vector<double> mean(dim);
      double norm_sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        mean[i] = centers[c][i] + scale * rng.normal();
        norm_sq += mean[i] * mean[i];
      }
      const double norm = std::sqrt(norm_sq);
      for (double& x : mean) x /= norm;
      std::vector<double> covariance(packed_size(dim), 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        const double spread = scale * rng.uniform(0.5, 1.5);
        covariance[packed_index(i, i)] = spread * spread;
      }
      zoo.models.emplace_back(zoo_model_id(c, m), std::move(mean),
                              std::move(covariance), 1);
      zoo.labels.push_back(cluster_label(c));
    }
  }
  return zoo;
}

std::vector<double> draw_gaussian_samples(const ModelStatistics& generator,
                                          std::size_t count,
                                          std::uint64_t seed,
                                          std::uint64_t stream) {
  const auto dim = static_cast<Eigen::Index>(generator.dim());
  const CholeskyFactor factor = compute_regularized_cholesky(generator, 0.0);
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(dim, dim);
  bool diagonal = true;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = factor.lower[packed_index(static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(j))];
      lower(i, j) = v;
      if (i != j && v != 0.0) diagonal = false;
    }
  }

  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Rng rng = Rng::for_stream(seed, stream);
  RowMatrix standard(static_cast<Eigen::Index>(count), dim);
  for (Eigen::Index r = 0; r < standard.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) standard(r, c) = rng.normal();
  }
  RowMatrix samples;
  if (diagonal) {
    samples = standard * lower.diagonal().asDiagonal();
  } else {
    samples = standard * lower.transpose();
  }
  const Eigen::Map<const Eigen::RowVectorXd> mean(generator.mean().data(), dim);
  samples.rowwise() += mean;
  return std::vector<double>(samples.data(), samples.data() + samples.size());
}

std::vector<float> draw_gaussian_sample_rows(const ModelStatistics& generator,
                                             std::size_t count,
                                             std::uint64_t seed,
                                             std::uint64_t stream) {
  const std::vector<double> samples =
      draw_gaussian_samples(generator, count, seed, stream);
  return std::vector<float>(samples.begin(), samples.end());
}

}  // namespace modelsearch
