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

// Scoring-throughput benchmark: time to score every model for one query,
// reported separately from query embedding and from top-k selection.
//
// Simulated stores are generated model by model from the benchmark zoo
// (unit means, I + symmetric noise covariances) straight into the columnar
// layout the method needs. When that store does not fit in available
// memory the single-pass run is reported as out of memory; with streaming
// allowed the records are spilled to a scratch file and scored chunk by
// chunk instead.

#ifndef MODELSEARCH_BENCH_H_
#define MODELSEARCH_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modelsearch/index.h"
#include "modelsearch/scoring.h"

namespace modelsearch {

struct BenchOptions {
  std::size_t count = 133;
  std::size_t dim = 512;
  ScoreMethod method = ScoreMethod::first_moment();
  std::size_t repetitions = 10;
  // Untimed runs before the timed ones.
  std::size_t warmup = 2;
  double noise_amplitude = 0.01;
  std::uint64_t seed = 0;
  bool allow_streaming = false;
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path();
  // Bytes the store may occupy; default is MemAvailable minus headroom.
  std::optional<std::size_t> memory_budget;
};

struct TimingSummary {
  std::size_t repetitions = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

// Median and nearest-rank p95 of `samples_ms`.
TimingSummary summarize_timings(std::vector<double> samples_ms);

struct BenchReport {
  std::string method;
  std::size_t count = 0;
  std::size_t dim = 0;
  // "resident", "streamed" or "out_of_memory".
  std::string mode;
  // True when the store could not be held for a single pass.
  bool single_pass_out_of_memory = false;
  std::size_t store_bytes = 0;
  std::size_t memory_budget_bytes = 0;
  // Largest amount of store data resident at once.
  std::size_t peak_store_bytes = 0;
  // Absent when out of memory.
  std::optional<TimingSummary> scoring;
  std::optional<TimingSummary> top_k_selection;
  TimingSummary embedding;
  double build_seconds = 0.0;
  std::string note;
};

// MemAvailable from /proc/meminfo, or nullopt where unavailable.
std::optional<std::size_t> available_memory_bytes();

BenchReport run_simulated_bench(const BenchOptions& options);

// Scores the snapshot's own statistics with an in-memory store.
BenchReport run_snapshot_bench(const IndexSnapshot& snapshot,
                               const ScoreMethod& method,
                               std::size_t repetitions, std::size_t warmup);

std::string bench_report_json(const BenchReport& report);
std::string bench_report_text(const BenchReport& report);

}  // namespace modelsearch

#endif  // MODELSEARCH_BENCH_H_
