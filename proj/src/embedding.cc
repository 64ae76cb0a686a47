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

#include "modelsearch/embedding.h"

#include <httplib.h>

#include <json.hpp>
#include <vector>

#include "modelsearch/error.h"
#include "modelsearch/hash.h"
#include "modelsearch/random.h"

namespace modelsearch {
namespace {

void check_payload(Modality modality, std::string_view payload) {
  if (modality == Modality::kModel) {
    throw Error(ErrorCode::kInvalidArgument,
                "model queries are resolved by the index, not embedded");
  }
  if (payload.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "query payload is empty");
  }
}

}  // namespace

std::string_view modality_name(Modality modality) {
  switch (modality) {
    case Modality::kText:
      return "text";
    case Modality::kImage:
      return "image";
    case Modality::kSketch:
      return "sketch";
    case Modality::kModel:
      return "model";
  }
  return "unknown";
}

std::optional<Modality> parse_modality(std::string_view name) {
  for (Modality m : {Modality::kText, Modality::kImage, Modality::kSketch,
                     Modality::kModel}) {
    if (modality_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view embedding_kind(Modality modality) {
  return modality == Modality::kText ? "text" : "image";
}

StubEmbeddingProvider::StubEmbeddingProvider(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
}

NormalizedFeature StubEmbeddingProvider::embed(Modality modality,
                                               std::string_view payload) const {
  check_payload(modality, payload);
  std::string message(embedding_kind(modality));
  message.push_back('\0');
  message.append(payload);
  const auto digest = sha256(message);
  std::uint64_t seed = 0;
  for (int i = 7; i >= 0; --i) seed = (seed << 8) | digest[static_cast<std::size_t>(i)];
  Rng rng(seed);
  std::vector<double> values(dim_);
  for (double& v : values) v = rng.normal();
  return normalize(values);
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(
    std::string endpoint_url, std::size_t dim, std::chrono::milliseconds timeout)
    : endpoint_url_(std::move(endpoint_url)), dim_(dim), timeout_(timeout) {
  if (endpoint_url_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "remote provider needs an endpoint URL");
  }
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
  while (endpoint_url_.size() > 1 && endpoint_url_.back() == '/') endpoint_url_.pop_back();
}

NormalizedFeature RemoteEmbeddingProvider::embed(Modality modality,
                                                 std::string_view payload) const {
  check_payload(modality, payload);
  httplib::Client client(endpoint_url_);
  if (!client.is_valid()) {
    throw Error(ErrorCode::kProviderUnavailable,
                "invalid provider endpoint " + endpoint_url_);
  }
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const nlohmann::json body{{"kind", embedding_kind(modality)},
                            {"payload", payload}};
  const auto result = client.Post("/embed", body.dump(), "application/json");
  if (!result) {
    const httplib::Error err = result.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           err == httplib::Error::Read;
    throw Error(timed_out ? ErrorCode::kProviderTimeout
                          : ErrorCode::kProviderUnavailable,
                "embedding provider " + endpoint_url_ + ": " +
                    httplib::to_string(err));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kProviderUnavailable,
                "embedding provider answered HTTP " +
                    std::to_string(result->status));
  }
  std::vector<double> vector;
  std::size_t reported_dim = 0;
  try {
    const auto reply = nlohmann::json::parse(result->body);
    reported_dim = reply.at("dim").get<std::size_t>();
    vector = reply.at("vector").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable,
                std::string("malformed embedding reply: ") + e.what());
  }
  if (reported_dim != dim_ || vector.size() != dim_) {
    throw Error(ErrorCode::kProviderDimMismatch,
                "embedding provider returned dim " +
                    std::to_string(vector.size()) + ", expected " +
                    std::to_string(dim_));
  }
  try {
    return normalize(FeatureVector(std::move(vector)));
  } catch (const Error& e) {
    throw Error(ErrorCode::kProviderUnavailable,
                std::string("unusable embedding: ") + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderConfig& config) {
  if (config.provider_kind == "stub") {
    return std::make_unique<StubEmbeddingProvider>(config.expected_dim);
  }
  if (config.provider_kind == "remote") {
    return std::make_unique<RemoteEmbeddingProvider>(
        config.endpoint_url, config.expected_dim, config.timeout);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown provider kind '" + config.provider_kind + "'");
}

}  // namespace modelsearch
