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

// HTTP search service.
//
//   POST /api/search                    ranked models for 1..8 queries
//   GET  /api/models/{id}               model metadata
//   GET  /api/models/{id}/similar?k=    precomputed nearest models
//   GET  /api/health                    snapshot version, size, dim
//
// Every handler reads the current snapshot once and answers entirely from
// it; the snapshot version is echoed in every response. Errors are
// {"error": {"code", "message"}} with 400 for bad requests, 404 for unknown
// models, 409 when the snapshot cannot serve the method and 502 when the
// embedding provider fails.

#ifndef MODELSEARCH_SERVICE_H_
#define MODELSEARCH_SERVICE_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "modelsearch/embedding.h"
#include "modelsearch/error.h"
#include "modelsearch/index.h"

namespace modelsearch {

inline constexpr std::size_t kMaxQueriesPerRequest = 8;
inline constexpr std::size_t kMaxResultsPerRequest = 100;
inline constexpr std::size_t kDefaultResultCount = 10;

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path snapshot_dir;
  EmbeddingProviderConfig provider;
  std::string default_method = "first_moment";
  // Overrides the snapshot's tau when set.
  std::optional<double> default_tau;
  // Directory served at "/" when set (the web client build).
  std::optional<std::filesystem::path> static_dir;
};

// Reads a JSON config file (optional) and applies MODELSEARCH_* variables
// from `getenv` on top:
//   MODELSEARCH_LISTEN             host:port
//   MODELSEARCH_SNAPSHOT_DIR
//   MODELSEARCH_PROVIDER_KIND      stub | remote
//   MODELSEARCH_PROVIDER_ENDPOINT
//   MODELSEARCH_PROVIDER_TIMEOUT_MS
//   MODELSEARCH_DEFAULT_METHOD
//   MODELSEARCH_DEFAULT_TAU
//   MODELSEARCH_STATIC_DIR
// Throws ParseError / InvalidArgument.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
ServiceConfig load_service_config(
    const std::optional<std::filesystem::path>& file, const EnvLookup& getenv);
EnvLookup process_environment();

// HTTP status for an error code.
int http_status(ErrorCode code);

struct HttpResponse {
  int status = 200;
  std::string body;
};

class SearchService {
 public:
  // Throws InvalidArgument when the provider dim differs from the snapshot
  // dim or the default method is unknown.
  SearchService(std::shared_ptr<const IndexSnapshot> snapshot,
                std::shared_ptr<const EmbeddingProvider> provider,
                ServiceConfig config);

  HttpResponse handle_search(std::string_view body) const;
  HttpResponse handle_model_detail(std::string_view model_id) const;
  // `k` is the raw query parameter; absent means kDefaultResultCount.
  HttpResponse handle_similar(std::string_view model_id,
                              std::optional<std::string_view> k) const;
  HttpResponse handle_health() const;

  std::shared_ptr<const IndexSnapshot> snapshot() const { return holder_.get(); }
  // Atomically replaces the served snapshot; throws InvalidArgument on a
  // dim change.
  void publish(std::shared_ptr<const IndexSnapshot> next);
  // Loads config.snapshot_dir and publishes it.
  void reload();

  const ServiceConfig& config() const { return config_; }

 private:
  SnapshotHolder holder_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  ServiceConfig config_;
};

// Binds the routes of `service` on an httplib server.
class HttpServer {
 public:
  explicit HttpServer(const SearchService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();
  // Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modelsearch

#endif  // MODELSEARCH_SERVICE_H_
