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

// The modelsearch command line.
//
//   modelsearch simulate --out DIR [--kind clustered|table3] ...
//   modelsearch ingest   --input DIR --snapshot DIR [--keep-samples] ...
//   modelsearch search   --snapshot DIR (--text T | --image F | --sketch F |
//                        --model ID)... [--method M] [--k K] [--json]
//   modelsearch eval     --snapshot DIR [--methods a,b] [--queries self|sampled]
//   modelsearch bench    [--snapshot DIR | --count N --dim D] [--method M]
//   modelsearch serve    [--config FILE] [--snapshot DIR] [--listen H:P]
//
// Exit status is 0 on success, 1 on runtime errors and 2 on usage errors.

#ifndef MODELSEARCH_CLI_H_
#define MODELSEARCH_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "modelsearch/feature_stats.h"
#include "modelsearch/index.h"

namespace modelsearch {

inline constexpr std::string_view kSimulationMetadataFile = "metadata.json";

struct SimulateOptions {
  // "clustered" (labelled zoo) or "table3" (benchmark zoo).
  std::string kind = "clustered";
  std::size_t clusters = 10;
  std::size_t models_per_cluster = 13;
  // Model count of the table3 kind.
  std::size_t count = 133;
  std::size_t dim = 512;
  // Sample features written per model.
  std::size_t samples = 1000;
  double separation = 0.5;
  double within_sigma = 0.05;
  double noise_amplitude = 0.01;
  std::uint64_t seed = 0;
};

struct SimulatedZoo {
  // Generating Gaussians, in ingestion order.
  std::vector<ModelStatistics> generators;
  std::vector<std::vector<std::string>> labels;
};

SimulatedZoo simulated_generators(const SimulateOptions& options);

// Sample rows written for generator `index` (float32, row-major).
std::vector<float> simulated_sample_rows(const SimulateOptions& options,
                                         const ModelStatistics& generator,
                                         std::size_t index);

// Writes <id>.mvft per model plus metadata.json into `directory`.
void write_simulated_dumps(const SimulateOptions& options,
                           const std::filesystem::path& directory);

struct IngestOptions {
  bool keep_samples = false;
  IndexConfig config;
};

// Reads every dump in `directory` (ids are file stems, ingested in sorted
// file-name order), applies metadata.json when present and precomputes
// similar-model lists. Per-file problems are written to `diagnostics`
// before an Error is thrown.
IndexSnapshot ingest_dump_directory(const std::filesystem::path& directory,
                                    const IngestOptions& options,
                                    std::ostream& diagnostics);

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace modelsearch

#endif  // MODELSEARCH_CLI_H_
