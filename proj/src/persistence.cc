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

#include "modelsearch/persistence.h"

#include <cstdio>
#include <json.hpp>
#include <set>
#include <system_error>

#include "binary_io.h"
#include "modelsearch/error.h"
#include "modelsearch/hash.h"

namespace modelsearch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kBlobMagic = "MVST";
constexpr std::uint8_t kFlagSamples = 0x01;
constexpr std::string_view kBlobDirectory = "blobs";

std::string blob_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.mvst", index);
  return std::string(kBlobDirectory) + "/" + buf;
}

[[noreturn]] void corrupt(const std::string& message) {
  throw Error(ErrorCode::kCorruptManifest, message);
}

json config_to_json(const IndexConfig& config) {
  return json{{"tau", config.tau},
              {"epsilon_scale", config.epsilon_scale},
              {"normalize", config.normalize},
              {"similar_count", config.similar_count}};
}

IndexConfig config_from_json(const json& j) {
  IndexConfig config;
  config.tau = j.at("tau").get<double>();
  config.epsilon_scale = j.at("epsilon_scale").get<double>();
  config.normalize = j.at("normalize").get<bool>();
  config.similar_count = j.at("similar_count").get<std::size_t>();
  return config;
}

}  // namespace

std::string encode_statistics_blob(const ModelStatistics& stats) {
  internal::ByteWriter out;
  const std::size_t dim = stats.dim();
  out.reserve(21 + 4 * (dim + packed_size(dim) + stats.samples().size()));
  out.bytes(kBlobMagic);
  out.u32(kStatisticsBlobVersion);
  out.u32(static_cast<std::uint32_t>(dim));
  out.u64(stats.sample_count());
  out.u8(stats.has_samples() ? kFlagSamples : 0);
  for (double v : stats.mean()) out.f32(static_cast<float>(v));
  for (double v : stats.covariance_packed()) out.f32(static_cast<float>(v));
  for (float v : stats.samples()) out.f32(v);
  return out.release();
}

ModelStatistics decode_statistics_blob(std::string model_id,
                                       std::string_view bytes) {
  internal::ByteReader in(bytes);
  if (in.bytes(4) != kBlobMagic) {
    corrupt("blob of '" + model_id + "' lacks MVST magic");
  }
  const std::uint32_t version = in.u32();
  if (!in.ok()) corrupt("blob of '" + model_id + "' is truncated");
  if (version != kStatisticsBlobVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "blob version " + std::to_string(version) + " of '" +
                    model_id + "' is not supported");
  }
  const std::uint32_t dim = in.u32();
  const std::uint64_t sample_count = in.u64();
  const std::uint8_t flags = in.u8();
  if (!in.ok() || dim == 0 || sample_count == 0) {
    corrupt("blob header of '" + model_id + "' is invalid");
  }
  if ((flags & ~kFlagSamples) != 0) {
    corrupt("blob of '" + model_id + "' has unknown flags");
  }
  const bool has_samples = (flags & kFlagSamples) != 0;
  const std::uint64_t sample_values = has_samples ? sample_count * dim : 0;
  if (has_samples && sample_values / dim != sample_count) {
    corrupt("blob of '" + model_id + "' has an impossible sample count");
  }
  const std::uint64_t expected =
      4 * (std::uint64_t{dim} + packed_size(dim) + sample_values);
  if (in.remaining() != expected) {
    corrupt("blob of '" + model_id + "' has " +
            std::to_string(in.remaining()) + " payload bytes, expected " +
            std::to_string(expected));
  }
  std::vector<double> mean(dim);
  for (double& v : mean) v = in.f32();
  std::vector<double> covariance(packed_size(dim));
  for (double& v : covariance) v = in.f32();
  std::vector<float> samples(sample_values);
  for (float& v : samples) v = in.f32();
  try {
    return ModelStatistics(std::move(model_id), std::move(mean),
                           std::move(covariance), sample_count,
                           std::move(samples));
  } catch (const Error& e) {
    corrupt(e.what());
  }
}

fs::path save_snapshot(const IndexSnapshot& snapshot,
                       const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory / kBlobDirectory, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + directory.string() + ": " + ec.message());
  }
  json models = json::array();
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const ModelRecord& record = snapshot.record(i);
    const std::string blob = encode_statistics_blob(record.statistics);
    const std::string name = blob_name(i);
    internal::write_file(directory / name, blob);
    json similar = nullptr;
    if (record.similar) {
      similar = json::array();
      for (const auto& entry : *record.similar) {
        similar.push_back(
            json{{"model_id", entry.model_id}, {"distance", entry.distance}});
      }
    }
    models.push_back(json{{"model_id", record.model_id},
                          {"display_name", record.display_name},
                          {"description", record.description},
                          {"labels", record.labels},
                          {"thumbnail_uris", record.thumbnail_uris},
                          {"blob", name},
                          {"blob_bytes", blob.size()},
                          {"sha256", sha256_hex(blob)},
                          {"similar", similar}});
  }
  const json manifest{{"format_version", kManifestFormatVersion},
                      {"snapshot_version", snapshot.version()},
                      {"dim", snapshot.dim()},
                      {"config", config_to_json(snapshot.config())},
                      {"models", models}};
  const fs::path manifest_path = directory / kManifestFileName;
  const fs::path staging = directory / "manifest.json.tmp";
  internal::write_file(staging, manifest.dump(2) + "\n");
  fs::rename(staging, manifest_path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot publish " + manifest_path.string() + ": " +
                    ec.message());
  }
  return manifest_path;
}

IndexSnapshot load_snapshot(const fs::path& directory) {
  const fs::path manifest_path = directory / kManifestFileName;
  std::string text;
  try {
    text = internal::read_file(manifest_path);
  } catch (const Error&) {
    corrupt("missing manifest " + manifest_path.string());
  }
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    corrupt("manifest is not valid JSON: " + std::string(e.what()));
  }

  try {
    const int format = manifest.at("format_version").get<int>();
    if (format != kManifestFormatVersion) {
      throw Error(ErrorCode::kUnsupportedVersion,
                  "manifest format_version " + std::to_string(format) +
                      " is not supported");
    }
    const auto version = manifest.at("snapshot_version").get<std::uint64_t>();
    const auto dim = manifest.at("dim").get<std::size_t>();
    const IndexConfig config = config_from_json(manifest.at("config"));

    std::vector<ModelRecord> records;
    std::set<std::string> seen;
    for (const json& entry : manifest.at("models")) {
      std::string id = entry.at("model_id").get<std::string>();
      if (!seen.insert(id).second) corrupt("duplicate model id '" + id + "'");
      const auto blob_path = entry.at("blob").get<std::string>();
      if (blob_path.find("..") != std::string::npos || blob_path.empty() ||
          blob_path.front() == '/') {
        corrupt("blob path of '" + id + "' escapes the snapshot");
      }
      std::string blob;
      try {
        blob = internal::read_file(directory / blob_path);
      } catch (const Error&) {
        throw Error(ErrorCode::kChecksumMismatch,
                    "blob of '" + id + "' is missing: " + blob_path);
      }
      if (sha256_hex(blob) != entry.at("sha256").get<std::string>()) {
        throw Error(ErrorCode::kChecksumMismatch,
                    "checksum mismatch for blob of '" + id + "'");
      }
      ModelStatistics stats = decode_statistics_blob(id, blob);
      if (stats.dim() != dim) {
        corrupt("blob of '" + id + "' has dim " + std::to_string(stats.dim()) +
                ", manifest dim is " + std::to_string(dim));
      }
      std::optional<std::vector<SimilarEntry>> similar;
      if (!entry.at("similar").is_null()) {
        similar.emplace();
        for (const json& s : entry.at("similar")) {
          similar->push_back({s.at("model_id").get<std::string>(),
                              s.at("distance").get<double>()});
        }
      }
      records.push_back(ModelRecord{
          std::move(id), entry.at("display_name").get<std::string>(),
          entry.at("description").get<std::string>(),
          entry.at("labels").get<std::vector<std::string>>(), std::move(stats),
          entry.at("thumbnail_uris").get<std::vector<std::string>>(),
          std::move(similar)});
    }
    for (const auto& record : records) {
      if (!record.similar) continue;
      for (const auto& s : *record.similar) {
        if (!seen.contains(s.model_id)) {
          corrupt("similar list of '" + record.model_id +
                  "' names unknown model '" + s.model_id + "'");
        }
      }
    }
    try {
      return IndexSnapshot::build(std::move(records), config, version);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNotPositiveDefinite) throw;
      corrupt(e.what());
    }
  } catch (const json::exception& e) {
    corrupt("manifest is malformed: " + std::string(e.what()));
  }
}

}  // namespace modelsearch
