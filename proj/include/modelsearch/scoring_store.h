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

// Columnar float32 store holding only what one scoring method reads, laid
// out as one fixed-size record per model. Used for large-scale scans where
// full ModelStatistics objects would not fit in memory.
//
// Record layouts (floats):
//   first_moment         unit mean [dim]
//   first_second_moment  mean [dim], packed covariance
//   gaussian_density     mean [dim], packed Cholesky factor of Sigma + eps I
//   monte_carlo          sample rows [samples x dim]
// Gaussian log-determinants are kept beside the records in double.

#ifndef MODELSEARCH_SCORING_STORE_H_
#define MODELSEARCH_SCORING_STORE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "modelsearch/feature_stats.h"
#include "modelsearch/scoring.h"

namespace modelsearch {

// Floats per model record for `method` at `dim`.
std::size_t store_record_floats(const ScoreMethod& method, std::size_t dim);

// Scores `count` consecutive records. `logdets` is read for
// gaussian_density only and must hold `count` values.
void score_store_records(const ScoreMethod& method, std::size_t dim,
                         const float* records, const double* logdets,
                         std::size_t count, std::span<const double> query,
                         double* out);

class ScoringStore {
 public:
  // method.validate() must pass; monte_carlo keeps method.sample_count rows.
  ScoringStore(ScoreMethod method, std::size_t dim);

  const ScoreMethod& method() const { return method_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  std::size_t record_floats() const { return record_floats_; }
  // Heap bytes held by records and side arrays.
  std::size_t bytes() const;

  void reserve(std::size_t models);

  // Appends the fields the method needs. gaussian_density uses the cached
  // factor when it matches method.epsilon_scale and factors otherwise.
  void add(const ModelStatistics& stats);
  // Appends a precomputed record (record_floats() values) and log-det.
  void add_record(std::span<const float> record, double logdet = 0.0);

  // out[i] = score of model i; out.size() must equal size().
  void score(std::span<const double> query, std::span<double> out) const;

 private:
  ScoreMethod method_;
  std::size_t dim_;
  std::size_t record_floats_;
  std::size_t count_ = 0;
  std::vector<float> records_;
  std::vector<double> logdets_;
};

// Fills a store record for `stats` (see layouts above). Returns the
// log-determinant for gaussian_density and 0 otherwise.
double make_store_record(const ScoreMethod& method, const ModelStatistics& stats,
                         std::span<float> record);

}  // namespace modelsearch

#endif  // MODELSEARCH_SCORING_STORE_H_
