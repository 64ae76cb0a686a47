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

// Synthetic model statistics for benchmarks and accuracy tests.
//
// Every generator is a pure function of its seed. Per-model randomness comes
// from Rng::for_stream(seed, model_index), so model i is the same whether it
// is generated alone or as part of a batch.

#ifndef MODELSEARCH_SIMULATE_H_
#define MODELSEARCH_SIMULATE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "modelsearch/feature_stats.h"
#include "modelsearch/random.h"

namespace modelsearch {

// Unit mean drawn from N(0, I) and normalized.
std::vector<double> simulate_unit_mean(Rng& rng, std::size_t dim);

// Packed covariance I + (A + A^T)/2 with A_ij ~ U[-amplitude, amplitude].
// Draws a full dim x dim A from `rng` in row-major order.
std::vector<double> simulate_noisy_identity(Rng& rng, std::size_t dim,
                                            double noise_amplitude);

// Model `index` of simulate_models(…, seed). Simulated statistics are
// analytic, so sample_count is 1.
ModelStatistics simulate_model(std::uint64_t seed, std::size_t index,
                               std::size_t dim, double noise_amplitude);

// Runtime-benchmark zoo: unit means, covariance I + symmetric uniform noise.
// Ids are "sim-0000000", "sim-0000001", ... Throws InvalidAmplitude unless
// 0 <= noise_amplitude < 1.
std::vector<ModelStatistics> simulate_models(std::size_t count, std::size_t dim,
                                             double noise_amplitude,
                                             std::uint64_t seed);

std::string simulated_model_id(std::size_t index);

// Labelled zoo of Gaussians grouped around well-separated cluster centers.
struct ClusteredZoo {
  // Sampling distributions: unit-norm mean and diagonal covariance.
  std::vector<ModelStatistics> models;
  // labels[i] is the cluster of models[i], "cluster-03" style.
  std::vector<std::string> labels;
};

// Centers are uniform on the unit sphere with pairwise l2 distance >=
// separation (rejection sampling, bounded attempts; SeparationInfeasible when
// exhausted). A model mean is center + within_sigma * g / sqrt(dim),
// g ~ N(0, I), renormalized. Each model's samples spread with per-coordinate
// standard deviation within_sigma / sqrt(dim) * U[0.5, 1.5].
ClusteredZoo simulate_clustered_zoo(std::size_t clusters,
                                    std::size_t models_per_cluster,
                                    std::size_t dim, double separation,
                                    double within_sigma, std::uint64_t seed);

// `count` rows drawn from N(mean, covariance) of `generator`, row-major.
// Uses Rng::for_stream(seed, stream).
std::vector<double> draw_gaussian_samples(const ModelStatistics& generator,
                                          std::size_t count,
                                          std::uint64_t seed,
                                          std::uint64_t stream);

// Same draws rounded to float32, the sample-dump representation.
std::vector<float> draw_gaussian_sample_rows(const ModelStatistics& generator,
                                             std::size_t count,
                                             std::uint64_t seed,
                                             std::uint64_t stream);

}  // namespace modelsearch

#endif  // MODELSEARCH_SIMULATE_H_
