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

#include "modelsearch/service.h"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <variant>
#include <vector>

#include "modelsearch/persistence.h"

namespace modelsearch {
namespace {

using nlohmann::json;

HttpResponse json_response(int status, const json& body) {
  return {status, body.dump()};
}

HttpResponse error_response(const Error& e) {
  return json_response(
      http_status(e.code()),
      json{{"error",
            {{"code", error_code_name(e.code())}, {"message", e.what()}}}});
}

[[noreturn]] void bad_request(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

template <typename Fn>
HttpResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return json_response(
        500, json{{"error", {{"code", "Internal"}, {"message", e.what()}}}});
  }
}

json result_json(const IndexSnapshot& snapshot, const RankedResult& r) {
  const ModelRecord& record = snapshot.at(r.model_id);
  return json{{"model_id", r.model_id},
              {"display_name", record.display_name},
              {"score", r.score},
              {"rank", r.rank},
              {"thumbnail_uris", record.thumbnail_uris}};
}

std::size_t parse_k(const json& value) {
  if (!value.is_number_integer()) bad_request("k must be an integer");
  const auto k = value.get<std::int64_t>();
  if (k < 1 || k > static_cast<std::int64_t>(kMaxResultsPerRequest)) {
    bad_request("k must be in [1, " + std::to_string(kMaxResultsPerRequest) + "]");
  }
  return static_cast<std::size_t>(k);
}

ScoreMethod method_for(const IndexSnapshot& snapshot, MethodKind kind,
                       const ServiceConfig& config,
                       std::optional<std::size_t> sample_count) {
  const double tau = config.default_tau.value_or(snapshot.config().tau);
  switch (kind) {
    case MethodKind::kFirstMoment:
      return ScoreMethod::first_moment(tau);
    case MethodKind::kFirstSecondMoment:
      return ScoreMethod::first_second_moment(tau);
    case MethodKind::kGaussianDensity:
      return ScoreMethod::gaussian_density(snapshot.config().epsilon_scale);
    case MethodKind::kFrechet:
      if (!snapshot.similarity_precomputed()) {
        throw Error(ErrorCode::kMethodUnavailable,
                    "snapshot has no precomputed similar-model lists");
      }
      return ScoreMethod::frechet();
    case MethodKind::kMonteCarlo: {
      const std::size_t cached = snapshot.min_cached_samples();
      if (cached == 0) {
        throw Error(ErrorCode::kMethodUnavailable,
                    "snapshot was ingested without samples; monte_carlo is "
                    "unavailable");
      }
      const std::size_t n = sample_count.value_or(cached);
      if (n == 0 || n > cached) {
        throw Error(ErrorCode::kMethodUnavailable,
                    "monte_carlo with " + std::to_string(n) +
                        " samples exceeds the " + std::to_string(cached) +
                        " cached per model");
      }
      return ScoreMethod::monte_carlo(n, tau);
    }
  }
  bad_request("unknown method");
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_double(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void set_listen(ServiceConfig& config, const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "listen address must be host:port, got '" + listen + "'");
  }
  const auto port = parse_int(std::string_view(listen).substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad listen port in '" + listen + "'");
  }
  config.listen_host = listen.substr(0, colon);
  config.listen_port = *port;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownModelId:
      return 404;
    case ErrorCode::kMethodUnavailable:
    case ErrorCode::kSamplesUnavailable:
    case ErrorCode::kNotPrecomputed:
      return 409;
    case ErrorCode::kProviderTimeout:
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kProviderDimMismatch:
      return 502;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kZeroVector:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kDegenerateMean:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kEmptyQuerySet:
    case ErrorCode::kParseError:
      return 400;
    default:
      return 500;
  }
}

ServiceConfig load_service_config(
    const std::optional<std::filesystem::path>& file, const EnvLookup& getenv) {
  ServiceConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) {
      throw Error(ErrorCode::kIoError, "cannot read config " + file->string());
    }
    json j;
    try {
      j = json::parse(in);
      if (j.contains("listen")) set_listen(config, j["listen"].get<std::string>());
      if (j.contains("snapshot_dir")) {
        config.snapshot_dir = j["snapshot_dir"].get<std::string>();
      }
      if (j.contains("provider")) {
        const json& p = j["provider"];
        if (p.contains("kind")) config.provider.provider_kind = p["kind"].get<std::string>();
        if (p.contains("endpoint")) config.provider.endpoint_url = p["endpoint"].get<std::string>();
        if (p.contains("timeout_ms")) {
          config.provider.timeout = std::chrono::milliseconds(p["timeout_ms"].get<std::int64_t>());
        }
      }
      if (j.contains("default_method")) {
        config.default_method = j["default_method"].get<std::string>();
      }
      if (j.contains("default_tau")) config.default_tau = j["default_tau"].get<double>();
      if (j.contains("static_dir")) {
        config.static_dir = std::filesystem::path(j["static_dir"].get<std::string>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "config " + file->string() + ": " + e.what());
    }
  }

  if (auto v = getenv("MODELSEARCH_LISTEN")) set_listen(config, *v);
  if (auto v = getenv("MODELSEARCH_SNAPSHOT_DIR")) config.snapshot_dir = *v;
  if (auto v = getenv("MODELSEARCH_PROVIDER_KIND")) config.provider.provider_kind = *v;
  if (auto v = getenv("MODELSEARCH_PROVIDER_ENDPOINT")) config.provider.endpoint_url = *v;
  if (auto v = getenv("MODELSEARCH_PROVIDER_TIMEOUT_MS")) {
    const auto ms = parse_int(*v);
    if (!ms || *ms <= 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "MODELSEARCH_PROVIDER_TIMEOUT_MS must be a positive integer");
    }
    config.provider.timeout = std::chrono::milliseconds(*ms);
  }
  if (auto v = getenv("MODELSEARCH_DEFAULT_METHOD")) config.default_method = *v;
  if (auto v = getenv("MODELSEARCH_DEFAULT_TAU")) {
    const auto tau = parse_double(*v);
    if (!tau) throw Error(ErrorCode::kInvalidArgument, "MODELSEARCH_DEFAULT_TAU is not a number");
    config.default_tau = *tau;
  }
  if (auto v = getenv("MODELSEARCH_STATIC_DIR")) config.static_dir = std::filesystem::path(*v);

  if (!parse_method_name(config.default_method)) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown default method '" + config.default_method + "'");
  }
  if (config.default_tau && !(*config.default_tau > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "default tau must be > 0");
  }
  return config;
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

SearchService::SearchService(std::shared_ptr<const IndexSnapshot> snapshot,
                             std::shared_ptr<const EmbeddingProvider> provider,
                             ServiceConfig config)
    : holder_(std::move(snapshot)),
      provider_(std::move(provider)),
      config_(std::move(config)) {
  if (!holder_.get() || !provider_) {
    throw Error(ErrorCode::kInvalidArgument, "service needs a snapshot and a provider");
  }
  if (provider_->dim() != holder_.get()->dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "provider dim " + std::to_string(provider_->dim()) +
                    " does not match snapshot dim " +
                    std::to_string(holder_.get()->dim()));
  }
  if (!parse_method_name(config_.default_method)) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown default method '" + config_.default_method + "'");
  }
}

void SearchService::publish(std::shared_ptr<const IndexSnapshot> next) {
  if (!next || next->dim() != provider_->dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "replacement snapshot must have dim " +
                    std::to_string(provider_->dim()));
  }
  holder_.publish(std::move(next));
}

void SearchService::reload() {
  publish(std::make_shared<const IndexSnapshot>(load_snapshot(config_.snapshot_dir)));
}

HttpResponse SearchService::handle_search(std::string_view body) const {
  return guarded([&] {
    const auto snapshot = holder_.get();
    json request;
    try {
      request = json::parse(body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, std::string("request is not JSON: ") + e.what());
    }
    if (!request.is_object()) bad_request("request must be a JSON object");

    std::string method_name = config_.default_method;
    if (request.contains("method")) {
      if (!request["method"].is_string()) bad_request("method must be a string");
      method_name = request["method"].get<std::string>();
    }
    const auto kind = parse_method_name(method_name);
    if (!kind) bad_request("unknown method '" + method_name + "'");

    const std::size_t k =
        request.contains("k") ? parse_k(request["k"]) : kDefaultResultCount;

    std::optional<std::size_t> sample_count;
    if (request.contains("sample_count")) {
      if (!request["sample_count"].is_number_unsigned()) {
        bad_request("sample_count must be a positive integer");
      }
      sample_count = request["sample_count"].get<std::size_t>();
    }

    if (!request.contains("queries") || !request["queries"].is_array()) {
      bad_request("queries must be an array");
    }
    const json& raw_queries = request["queries"];
    if (raw_queries.empty() || raw_queries.size() > kMaxQueriesPerRequest) {
      bad_request("queries must hold 1.." + std::to_string(kMaxQueriesPerRequest) +
                  " entries");
    }

    struct Parsed {
      Modality modality;
      std::string payload;
      double weight;
    };
    std::vector<Parsed> parsed;
    for (const json& q : raw_queries) {
      if (!q.is_object()) bad_request("each query must be an object");
      if (!q.contains("modality") || !q["modality"].is_string()) {
        bad_request("query modality must be a string");
      }
      const auto modality = parse_modality(q["modality"].get<std::string>());
      if (!modality) {
        bad_request("unknown modality '" + q["modality"].get<std::string>() + "'");
      }
      if (!q.contains("payload") || !q["payload"].is_string() ||
          q["payload"].get<std::string>().empty()) {
        bad_request("query payload must be a non-empty string");
      }
      double weight = 1.0;
      if (q.contains("weight")) {
        if (!q["weight"].is_number()) bad_request("weight must be a number");
        weight = q["weight"].get<double>();
        if (!(weight > 0.0) || !std::isfinite(weight)) bad_request("weights must be > 0");
      }
      parsed.push_back({*modality, q["payload"].get<std::string>(), weight});
    }

    const ScoreMethod method = method_for(*snapshot, *kind, config_, sample_count);
    std::vector<Query> queries;
    queries.reserve(parsed.size());
    for (const Parsed& p : parsed) {
      if (p.modality == Modality::kModel) {
        snapshot->at(p.payload);
        queries.push_back(Query::model(p.payload, p.weight));
      } else {
        queries.push_back(
            Query::feature(provider_->embed(p.modality, p.payload), p.weight));
      }
    }
    const auto ranked = search(*snapshot, queries, method, k);
    json results = json::array();
    for (const auto& r : ranked) results.push_back(result_json(*snapshot, r));
    return json_response(200, json{{"results", results},
                                   {"snapshot_version", snapshot->version()},
                                   {"method", method.name()}});
  });
}

HttpResponse SearchService::handle_model_detail(std::string_view model_id) const {
  return guarded([&] {
    const auto snapshot = holder_.get();
    const ModelRecord& record = snapshot->at(model_id);
    return json_response(
        200, json{{"model_id", record.model_id},
                  {"display_name", record.display_name},
                  {"description", record.description},
                  {"labels", record.labels},
                  {"thumbnail_uris", record.thumbnail_uris},
                  {"dim", record.statistics.dim()},
                  {"sample_count", record.statistics.sample_count()},
                  {"has_samples", record.statistics.has_samples()},
                  {"similar_available", record.similar.has_value()},
                  {"snapshot_version", snapshot->version()}});
  });
}

HttpResponse SearchService::handle_similar(std::string_view model_id,
                                           std::optional<std::string_view> k) const {
  return guarded([&] {
    const auto snapshot = holder_.get();
    std::size_t count = kDefaultResultCount;
    if (k) {
      const auto parsed = parse_int(*k);
      if (!parsed || *parsed < 1 || *parsed > static_cast<int>(kMaxResultsPerRequest)) {
        bad_request("k must be an integer in [1, " +
                    std::to_string(kMaxResultsPerRequest) + "]");
      }
      count = static_cast<std::size_t>(*parsed);
    }
    const auto ranked = similar_models(*snapshot, model_id, count);
    json results = json::array();
    for (const auto& r : ranked) {
      json entry = result_json(*snapshot, r);
      entry["distance"] = -r.score;
      results.push_back(std::move(entry));
    }
    return json_response(200, json{{"model_id", std::string(model_id)},
                                   {"results", results},
                                   {"snapshot_version", snapshot->version()},
                                   {"method", "frechet"}});
  });
}

HttpResponse SearchService::handle_health() const {
  return guarded([&] {
    const auto snapshot = holder_.get();
    return json_response(200, json{{"status", "ok"},
                                   {"snapshot_version", snapshot->version()},
                                   {"model_count", snapshot->size()},
                                   {"dim", snapshot->dim()},
                                   {"provider_kind", provider_->kind()}});
  });
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const SearchService& service) : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Post("/api/search", [&service, reply](const httplib::Request& req,
                                               httplib::Response& res) {
    reply(res, service.handle_search(req.body));
  });
  server.Get("/api/health", [&service, reply](const httplib::Request&,
                                              httplib::Response& res) {
    reply(res, service.handle_health());
  });
  server.Get(R"(/api/models/([^/]+)/similar)",
             [&service, reply](const httplib::Request& req, httplib::Response& res) {
               std::optional<std::string> k;
               if (req.has_param("k")) k = req.get_param_value("k");
               reply(res, service.handle_similar(
                              req.matches[1].str(),
                              k ? std::optional<std::string_view>(*k) : std::nullopt));
             });
  server.Get(R"(/api/models/([^/]+))",
             [&service, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.handle_model_detail(req.matches[1].str()));
             });
  if (service.config().static_dir) {
    server.set_mount_point("/", service.config().static_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kIoError,
                "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace modelsearch
