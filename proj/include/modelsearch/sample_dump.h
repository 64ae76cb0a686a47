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

// Raw sample-feature dumps ("MVFT" files).
//
// Layout, little-endian, no padding:
//   char[4] magic = "MVFT"
//   u32     version = 1
//   u32     dim
//   u64     count
//   f32     values[count * dim]   (row-major)

#ifndef MODELSEARCH_SAMPLE_DUMP_H_
#define MODELSEARCH_SAMPLE_DUMP_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modelsearch {

inline constexpr std::uint32_t kSampleDumpVersion = 1;

struct SampleDump {
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  std::vector<float> values;
};

std::string encode_sample_dump(std::uint32_t dim, std::span<const float> values);
// Throws ParseError on bad magic, truncation or trailing bytes, and
// UnsupportedVersion on a version other than 1.
SampleDump decode_sample_dump(std::string_view bytes);

SampleDump read_sample_dump(const std::filesystem::path& path);
void write_sample_dump(const std::filesystem::path& path, std::uint32_t dim,
                       std::span<const float> values);

}  // namespace modelsearch

#endif  // MODELSEARCH_SAMPLE_DUMP_H_
