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

// Query encoders. Text, image and sketch payloads are mapped to unit
// vectors by an EmbeddingProvider; model queries never reach a provider.
//
// The stub provider is deterministic: it hashes (kind, payload) with SHA-256,
// seeds the portable generator with the first 8 digest bytes and draws
// dim standard normals, then normalizes. The remote provider POSTs
// {"kind", "payload"} to {endpoint}/embed and expects {"dim", "vector"}.
// Sketches are embedded with kind "image".

#ifndef MODELSEARCH_EMBEDDING_H_
#define MODELSEARCH_EMBEDDING_H_

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "modelsearch/feature_stats.h"

namespace modelsearch {

enum class Modality { kText, kImage, kSketch, kModel };

std::string_view modality_name(Modality modality);
std::optional<Modality> parse_modality(std::string_view name);

// Wire kind sent to providers: "text" or "image".
std::string_view embedding_kind(Modality modality);

struct EmbeddingProviderConfig {
  // "stub" or "remote".
  std::string provider_kind = "stub";
  std::string endpoint_url;
  std::chrono::milliseconds timeout{5000};
  std::size_t expected_dim = 512;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t dim() const = 0;
  // Throws InvalidArgument for empty payloads or model modality,
  // ProviderTimeout, ProviderUnavailable, ProviderDimMismatch.
  virtual NormalizedFeature embed(Modality modality,
                                  std::string_view payload) const = 0;
};

class StubEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit StubEmbeddingProvider(std::size_t dim);

  std::string_view kind() const override { return "stub"; }
  std::size_t dim() const override { return dim_; }
  NormalizedFeature embed(Modality modality,
                          std::string_view payload) const override;

 private:
  std::size_t dim_;
};

class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  // endpoint_url like "http://127.0.0.1:9000".
  RemoteEmbeddingProvider(std::string endpoint_url, std::size_t dim,
                          std::chrono::milliseconds timeout);

  std::string_view kind() const override { return "remote"; }
  std::size_t dim() const override { return dim_; }
  NormalizedFeature embed(Modality modality,
                          std::string_view payload) const override;

 private:
  std::string endpoint_url_;
  std::size_t dim_;
  std::chrono::milliseconds timeout_;
};

// Throws InvalidArgument for an unknown provider_kind.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderConfig& config);

}  // namespace modelsearch

#endif  // MODELSEARCH_EMBEDDING_H_
