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

#include "modelsearch/sample_dump.h"

#include "binary_io.h"
#include "modelsearch/error.h"

namespace modelsearch {

namespace {
constexpr std::string_view kMagic = "MVFT";
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;
}  // namespace

std::string encode_sample_dump(std::uint32_t dim,
                               std::span<const float> values) {
  if (dim == 0 || values.size() % dim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample buffer is not a whole number of rows");
  }
  internal::ByteWriter out;
  out.reserve(kHeaderBytes + values.size() * 4);
  out.bytes(kMagic);
  out.u32(kSampleDumpVersion);
  out.u32(dim);
  out.u64(values.size() / dim);
  for (float v : values) out.f32(v);
  return out.release();
}

SampleDump decode_sample_dump(std::string_view bytes) {
  internal::ByteReader in(bytes);
  if (in.bytes(4) != kMagic) {
    throw Error(ErrorCode::kParseError, "missing MVFT magic");
  }
  const std::uint32_t version = in.u32();
  if (!in.ok()) throw Error(ErrorCode::kParseError, "truncated MVFT header");
  if (version != kSampleDumpVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "MVFT version " + std::to_string(version) + " is not supported");
  }
  SampleDump dump;
  dump.dim = in.u32();
  dump.count = in.u64();
  if (!in.ok()) throw Error(ErrorCode::kParseError, "truncated MVFT header");
  if (dump.dim == 0) throw Error(ErrorCode::kParseError, "MVFT dim is 0");
  const std::uint64_t expected = dump.count * dump.dim * 4;
  if (dump.count != 0 && expected / dump.count / 4 != dump.dim) {
    throw Error(ErrorCode::kParseError, "MVFT size overflows");
  }
  if (in.remaining() != expected) {
    throw Error(ErrorCode::kParseError,
                "MVFT payload is " + std::to_string(in.remaining()) +
                    " bytes, header implies " + std::to_string(expected));
  }
  dump.values.resize(dump.count * dump.dim);
  for (float& v : dump.values) v = in.f32();
  return dump;
}

SampleDump read_sample_dump(const std::filesystem::path& path) {
  return decode_sample_dump(internal::read_file(path));
}

void write_sample_dump(const std::filesystem::path& path, std::uint32_t dim,
                       std::span<const float> values) {
  internal::write_file(path, encode_sample_dump(dim, values));
}

}  // namespace modelsearch
