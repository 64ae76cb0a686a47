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

// On-disk snapshots.
//
// A snapshot directory holds manifest.json (ids, metadata, config, similar
// lists and a SHA-256 per blob) and blobs/NNNNNN.mvst, one per model:
//
//   char[4] magic = "MVST"
//   u32     version = 1
//   u32     dim
//   u64     sample_count
//   u8      flags           bit 0: samples present
//   f32     mean[dim]
//   f32     covariance[dim * (dim + 1) / 2]   packed row-major lower
//   f32     samples[sample_count * dim]       only when flagged
//
// All integers and floats are little-endian. Derived float64 caches
// (Cholesky factors) are recomputed on load.

#ifndef MODELSEARCH_PERSISTENCE_H_
#define MODELSEARCH_PERSISTENCE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "modelsearch/feature_stats.h"
#include "modelsearch/index.h"

namespace modelsearch {

inline constexpr std::uint32_t kStatisticsBlobVersion = 1;
inline constexpr int kManifestFormatVersion = 1;
inline constexpr std::string_view kManifestFileName = "manifest.json";

std::string encode_statistics_blob(const ModelStatistics& stats);
ModelStatistics decode_statistics_blob(std::string model_id,
                                       std::string_view bytes);

// Writes the snapshot into `directory` (created if needed) and returns the
// manifest path.
std::filesystem::path save_snapshot(const IndexSnapshot& snapshot,
                                    const std::filesystem::path& directory);

// Throws CorruptManifest, ChecksumMismatch or UnsupportedVersion.
IndexSnapshot load_snapshot(const std::filesystem::path& directory);

}  // namespace modelsearch

#endif  // MODELSEARCH_PERSISTENCE_H_
