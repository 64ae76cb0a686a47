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

#include "modelsearch/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "binary_io.h"
#include "modelsearch/bench.h"
#include "modelsearch/embedding.h"
#include "modelsearch/error.h"
#include "modelsearch/hash.h"
#include "modelsearch/persistence.h"
#include "modelsearch/random.h"
#include "modelsearch/retrieval_eval.h"
#include "modelsearch/sample_dump.h"
#include "modelsearch/service.h"
#include "modelsearch/simulate.h"

namespace modelsearch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> method_names() {
  return {"monte_carlo", "first_moment", "first_second_moment",
          "gaussian_density", "frechet"};
}

ScoreMethod make_method(MethodKind kind, double tau, double epsilon_scale,
                        std::size_t samples) {
  switch (kind) {
    case MethodKind::kMonteCarlo:
      return ScoreMethod::monte_carlo(samples, tau);
    case MethodKind::kFirstMoment:
      return ScoreMethod::first_moment(tau);
    case MethodKind::kFirstSecondMoment:
      return ScoreMethod::first_second_moment(tau);
    case MethodKind::kGaussianDensity:
      return ScoreMethod::gaussian_density(epsilon_scale);
    case MethodKind::kFrechet:
      return ScoreMethod::frechet();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method");
}

// Method with snapshot defaults for anything not given on the command line.
ScoreMethod snapshot_method(const IndexSnapshot& snapshot, const std::string& name,
                            std::optional<double> tau,
                            std::optional<double> epsilon_scale,
                            std::optional<std::size_t> samples) {
  const MethodKind kind = *parse_method_name(name);
  std::size_t n = samples.value_or(snapshot.min_cached_samples());
  if (kind == MethodKind::kMonteCarlo && n == 0) {
    throw Error(ErrorCode::kSamplesUnavailable,
                "snapshot has no cached samples; re-ingest with --keep-samples");
  }
  return make_method(kind, tau.value_or(snapshot.config().tau),
                     epsilon_scale.value_or(snapshot.config().epsilon_scale),
                     std::max<std::size_t>(n, 1));
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string display_name_for(const std::string& id) { return id; }

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const SimulateOptions& options, const fs::path& out_dir,
                 std::ostream& out) {
  write_simulated_dumps(options, out_dir);
  const std::size_t models = options.kind == "table3"
                                 ? options.count
                                 : options.clusters * options.models_per_cluster;
  out << "wrote " << models << " sample dumps (" << options.samples
      << " x " << options.dim << ") to " << out_dir.string() << "\n";
  return 0;
}

// ---- ingest --------------------------------------------------------------

int cmd_ingest(const fs::path& input, const fs::path& snapshot_dir,
               const IngestOptions& options, std::ostream& out,
               std::ostream& err) {
  const IndexSnapshot snapshot = ingest_dump_directory(input, options, err);
  const fs::path manifest = save_snapshot(snapshot, snapshot_dir);
  out << "ingested " << snapshot.size() << " models, dim " << snapshot.dim()
      << ", snapshot version " << snapshot.version() << " -> "
      << manifest.string() << "\n";
  return 0;
}

// ---- search --------------------------------------------------------------

struct SearchArgs {
  fs::path snapshot;
  std::vector<std::string> texts;
  std::vector<std::string> images;
  std::vector<std::string> sketches;
  std::vector<std::string> models;
  std::vector<double> weights;
  std::string method = "first_moment";
  std::size_t k = 10;
  std::optional<double> tau;
  std::optional<double> epsilon_scale;
  std::optional<std::size_t> samples;
  std::string provider_endpoint;
  bool json_output = false;
};

int cmd_search(const SearchArgs& args, std::ostream& out) {
  const IndexSnapshot snapshot = load_snapshot(args.snapshot);
  const ScoreMethod method = snapshot_method(snapshot, args.method, args.tau,
                                             args.epsilon_scale, args.samples);
  EmbeddingProviderConfig provider_config;
  provider_config.expected_dim = snapshot.dim();
  if (!args.provider_endpoint.empty()) {
    provider_config.provider_kind = "remote";
    provider_config.endpoint_url = args.provider_endpoint;
  }
  const auto provider = make_embedding_provider(provider_config);

  // Queries in a fixed order: texts, images, sketches, models.
  std::vector<Query> queries;
  for (const auto& t : args.texts) {
    queries.push_back(Query::feature(provider->embed(Modality::kText, t)));
  }
  for (const auto& path : args.images) {
    queries.push_back(Query::feature(
        provider->embed(Modality::kImage, base64_encode(internal::read_file(path)))));
  }
  for (const auto& path : args.sketches) {
    queries.push_back(Query::feature(
        provider->embed(Modality::kSketch, base64_encode(internal::read_file(path)))));
  }
  for (const auto& id : args.models) queries.push_back(Query::model(id));
  if (queries.empty()) {
    throw Error(ErrorCode::kEmptyQuerySet,
                "give at least one of --text, --image, --sketch, --model");
  }
  if (!args.weights.empty()) {
    if (args.weights.size() != queries.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  std::to_string(args.weights.size()) + " weights for " +
                      std::to_string(queries.size()) + " queries");
    }
    for (std::size_t i = 0; i < queries.size(); ++i) queries[i].weight = args.weights[i];
  }

  const auto results = search(snapshot, queries, method, args.k);
  if (args.json_output) {
    json rows = json::array();
    for (const auto& r : results) {
      rows.push_back({{"model_id", r.model_id}, {"score", r.score}, {"rank", r.rank}});
    }
    out << json{{"results", rows},
                {"snapshot_version", snapshot.version()},
                {"method", method.name()}}
               .dump(2)
        << "\n";
    return 0;
  }
  std::size_t width = 8;
  for (const auto& r : results) width = std::max(width, r.model_id.size());
  char line[512];
  std::snprintf(line, sizeof(line), "%-5s %-*s %s\n", "rank", static_cast<int>(width),
                "model_id", "score");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof(line), "%-5zu %-*s %s\n", r.rank,
                  static_cast<int>(width), r.model_id.c_str(),
                  format_score(r.score).c_str());
    out << line;
  }
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  fs::path snapshot;
  std::vector<std::string> methods{"first_moment", "gaussian_density"};
  std::string queries = "self";
  std::size_t per_model = 10;
  std::vector<std::size_t> top_ks{1, 5, 10};
  std::optional<double> tau;
  std::optional<double> epsilon_scale;
  std::optional<std::size_t> samples;
  std::uint64_t seed = 0;
  bool random_baseline = false;
  bool json_output = false;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const IndexSnapshot snapshot = load_snapshot(args.snapshot);
  const std::vector<EvalQuery> queries =
      args.queries == "self" ? self_queries(snapshot)
                             : sampled_self_queries(snapshot, args.per_model, args.seed);
  std::vector<RetrievalReport> reports;
  for (const auto& name : args.methods) {
    const ScoreMethod method = snapshot_method(snapshot, name, args.tau,
                                               args.epsilon_scale, args.samples);
    if (method.kind == MethodKind::kFrechet) {
      throw Error(ErrorCode::kMethodUnavailable,
                  "frechet ranks models against models and cannot score feature queries");
    }
    reports.push_back(evaluate_method(snapshot, queries, method, args.top_ks));
  }
  if (args.random_baseline) {
    reports.push_back(evaluate_random_baseline(snapshot, queries, args.seed, args.top_ks));
  }
  if (args.json_output) {
    out << report_json(reports) << "\n";
  } else {
    out << report_table(reports);
  }
  return 0;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::optional<fs::path> snapshot;
  BenchOptions options;
  std::string method = "first_moment";
  std::optional<double> tau;
  std::optional<double> epsilon_scale;
  std::size_t samples = 100;
  bool json_output = false;
};

int cmd_bench(BenchArgs args, std::ostream& out) {
  BenchReport report;
  if (args.snapshot) {
    const IndexSnapshot snapshot = load_snapshot(*args.snapshot);
    const ScoreMethod method = snapshot_method(
        snapshot, args.method, args.tau, args.epsilon_scale,
        args.method == "monte_carlo" ? std::optional<std::size_t>() : args.samples);
    report = run_snapshot_bench(snapshot, method, args.options.repetitions,
                                args.options.warmup);
  } else {
    args.options.method =
        make_method(*parse_method_name(args.method), args.tau.value_or(kDefaultTau),
                    args.epsilon_scale.value_or(kDefaultEpsilonScale), args.samples);
    report = run_simulated_bench(args.options);
  }
  out << (args.json_output ? bench_report_json(report) + "\n"
                           : bench_report_text(report));
  return 0;
}

// ---- serve ---------------------------------------------------------------

int cmd_serve(const std::optional<fs::path>& config_file,
              const std::optional<fs::path>& snapshot_dir,
              const std::optional<std::string>& listen, std::ostream& out) {
  ServiceConfig config = load_service_config(config_file, process_environment());
  if (snapshot_dir) config.snapshot_dir = *snapshot_dir;
  if (listen) {
    const auto colon = listen->rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--listen must be host:port");
    }
    config.listen_host = listen->substr(0, colon);
    config.listen_port = std::stoi(listen->substr(colon + 1));
  }
  if (config.snapshot_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no snapshot directory (--snapshot or MODELSEARCH_SNAPSHOT_DIR)");
  }
  auto snapshot = std::make_shared<const IndexSnapshot>(load_snapshot(config.snapshot_dir));
  config.provider.expected_dim = snapshot->dim();
  std::shared_ptr<const EmbeddingProvider> provider = make_embedding_provider(config.provider);
  SearchService service(std::move(snapshot), std::move(provider), config);
  HttpServer server(service);
  const int port = server.bind(config.listen_host, config.listen_port);
  out << "serving " << service.snapshot()->size() << " models on http://"
      << config.listen_host << ":" << port << "\n"
      << std::flush;
  server.serve();
  return 0;
}

}  // namespace

// ---- library entry points ------------------------------------------------

SimulatedZoo simulated_generators(const SimulateOptions& options) {
  SimulatedZoo zoo;
  if (options.kind == "clustered") {
    ClusteredZoo clustered = simulate_clustered_zoo(
        options.clusters, options.models_per_cluster, options.dim,
        options.separation, options.within_sigma, options.seed);
    zoo.generators = std::move(clustered.models);
    for (auto& label : clustered.labels) zoo.labels.push_back({std::move(label)});
  } else if (options.kind == "table3") {
    zoo.generators = simulate_models(options.count, options.dim,
                                     options.noise_amplitude, options.seed);
    zoo.labels.resize(zoo.generators.size());
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown simulation kind '" + options.kind + "'");
  }
  return zoo;
}

std::vector<float> simulated_sample_rows(const SimulateOptions& options,
                                         const ModelStatistics& generator,
                                         std::size_t index) {
  // Sample streams are keyed by a seed derived from the zoo seed so they
  // never coincide with the streams that built the generators.
  return draw_gaussian_sample_rows(generator, options.samples,
                                   splitmix64(options.seed), index);
}

void write_simulated_dumps(const SimulateOptions& options, const fs::path& directory) {
  if (options.samples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "samples must be >= 1");
  }
  const SimulatedZoo zoo = simulated_generators(options);
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + directory.string() + ": " + ec.message());
  }
  json models = json::object();
  for (std::size_t i = 0; i < zoo.generators.size(); ++i) {
    const ModelStatistics& generator = zoo.generators[i];
    const std::vector<float> rows = simulated_sample_rows(options, generator, i);
    write_sample_dump(directory / (generator.model_id() + ".mvft"),
                      static_cast<std::uint32_t>(options.dim), rows);
    models[generator.model_id()] = {
        {"display_name", display_name_for(generator.model_id())},
        {"description", "Simulated " + options.kind + " model"},
        {"labels", zoo.labels[i]},
        {"thumbnail_uris", json::array()}};
  }
  const json metadata{
      {"generator",
       {{"kind", options.kind},
        {"clusters", options.clusters},
        {"models_per_cluster", options.models_per_cluster},
        {"count", options.count},
        {"dim", options.dim},
        {"samples", options.samples},
        {"separation", options.separation},
        {"within_sigma", options.within_sigma},
        {"noise_amplitude", options.noise_amplitude},
        {"seed", options.seed}}},
      {"models", models}};
  internal::write_file(directory / kSimulationMetadataFile, metadata.dump(2) + "\n");
}

IndexSnapshot ingest_dump_directory(const fs::path& directory,
                                    const IngestOptions& options,
                                    std::ostream& diagnostics) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(ErrorCode::kIoError, directory.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == kSimulationMetadataFile) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  json metadata = json::object();
  const fs::path metadata_path = directory / kSimulationMetadataFile;
  if (fs::exists(metadata_path)) {
    try {
      metadata = json::parse(internal::read_file(metadata_path)).value("models", json::object());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  metadata_path.string() + ": " + std::string(e.what()));
    }
  }

  std::map<std::string, fs::path> by_id;
  std::size_t failures = 0;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    const auto [it, inserted] = by_id.emplace(id, file);
    if (!inserted) {
      diagnostics << file.string() << ": model id '" << id
                  << "' collides with " << it->second.string() << "\n";
      ++failures;
    }
  }

  std::vector<ModelRecord> records;
  std::optional<std::size_t> dim;
  std::set<std::string> used;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    if (by_id.at(id) != file || !used.insert(id).second) continue;
    try {
      const SampleDump dump = read_sample_dump(file);
      if (dim && *dim != dump.dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "dim " + std::to_string(dump.dim) + " differs from " +
                        std::to_string(*dim));
      }
      dim = dump.dim;
      MomentOptions moment_options;
      moment_options.keep_samples = options.keep_samples;
      moment_options.normalize = options.config.normalize;
      ModelRecord record{
          id, id, "", {},
          compute_moments(id, dump.values, dump.dim, moment_options), {},
          std::nullopt};
      if (metadata.contains(id)) {
        const json& m = metadata[id];
        record.display_name = m.value("display_name", id);
        record.description = m.value("description", "");
        record.labels = m.value("labels", std::vector<std::string>{});
        record.thumbnail_uris = m.value("thumbnail_uris", std::vector<std::string>{});
      }
      records.push_back(std::move(record));
    } catch (const Error& e) {
      diagnostics << file.string() << ": " << error_code_name(e.code()) << ": "
                  << e.what() << "\n";
      ++failures;
    } catch (const json::exception& e) {
      diagnostics << file.string() << ": bad metadata: " << e.what() << "\n";
      ++failures;
    }
  }
  if (failures > 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::to_string(failures) + " input file(s) could not be ingested");
  }
  if (records.empty()) {
    throw Error(ErrorCode::kEmptySampleSet, "no sample dumps in " + directory.string());
  }
  return precompute_similarity(IndexSnapshot::build(std::move(records), options.config));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search generative-model collections by their feature statistics",
               "modelsearch"};
  app.require_subcommand(1);
  const auto methods = method_names();

  // simulate
  SimulateOptions sim;
  fs::path sim_out;
  auto* simulate = app.add_subcommand("simulate", "Write simulated sample dumps");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--kind", sim.kind, "clustered or table3")
      ->check(CLI::IsMember({"clustered", "table3"}));
  simulate->add_option("--clusters", sim.clusters)->check(CLI::PositiveNumber);
  simulate->add_option("--models-per-cluster", sim.models_per_cluster)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--count", sim.count, "Models (table3)")->check(CLI::PositiveNumber);
  simulate->add_option("--dim", sim.dim)->check(CLI::PositiveNumber);
  simulate->add_option("--samples", sim.samples, "Samples per model")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--separation", sim.separation)->check(CLI::PositiveNumber);
  simulate->add_option("--within-sigma", sim.within_sigma)->check(CLI::PositiveNumber);
  simulate->add_option("--noise-amplitude", sim.noise_amplitude)
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seed", sim.seed);

  // ingest
  fs::path ingest_input;
  fs::path ingest_snapshot;
  IngestOptions ingest_options;
  bool no_normalize = false;
  auto* ingest = app.add_subcommand("ingest", "Build a snapshot from sample dumps");
  ingest->add_option("--input", ingest_input, "Directory of MVFT dumps")->required();
  ingest->add_option("--snapshot", ingest_snapshot, "Output snapshot directory")
      ->required();
  ingest->add_flag("--keep-samples", ingest_options.keep_samples,
                   "Store sample features for monte_carlo");
  ingest->add_flag("--no-normalize", no_normalize, "Use features as given");
  ingest->add_option("--tau", ingest_options.config.tau)->check(CLI::PositiveNumber);
  ingest->add_option("--epsilon-scale", ingest_options.config.epsilon_scale)
      ->check(CLI::NonNegativeNumber);
  ingest->add_option("--similar-count", ingest_options.config.similar_count);

  // search
  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "Rank models for a query");
  search_cmd->add_option("--snapshot", search_args.snapshot)->required();
  search_cmd->add_option("--text", search_args.texts, "Text query (repeatable)");
  search_cmd->add_option("--image", search_args.images, "Image file (repeatable)");
  search_cmd->add_option("--sketch", search_args.sketches, "Sketch file (repeatable)");
  search_cmd->add_option("--model", search_args.models, "Model id (repeatable)");
  search_cmd->add_option("--weight", search_args.weights,
                         "Per-query weights in text, image, sketch, model order");
  search_cmd->add_option("--method", search_args.method)->check(CLI::IsMember(methods));
  search_cmd->add_option("--k", search_args.k)->check(CLI::PositiveNumber);
  search_cmd->add_option("--tau", search_args.tau)->check(CLI::PositiveNumber);
  search_cmd->add_option("--epsilon-scale", search_args.epsilon_scale)
      ->check(CLI::NonNegativeNumber);
  search_cmd->add_option("--samples", search_args.samples, "monte_carlo sample count")
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--provider-endpoint", search_args.provider_endpoint,
                         "Remote embedding provider; the stub is used otherwise");
  search_cmd->add_flag("--json", search_args.json_output);

  // eval
  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Retrieval report for labelled self-queries");
  eval->add_option("--snapshot", eval_args.snapshot)->required();
  eval->add_option("--methods", eval_args.methods)->delimiter(',')->check(
      CLI::IsMember(methods));
  eval->add_option("--queries", eval_args.queries, "self or sampled")
      ->check(CLI::IsMember({"self", "sampled"}));
  eval->add_option("--per-model", eval_args.per_model)->check(CLI::PositiveNumber);
  eval->add_option("--k", eval_args.top_ks, "Top-k accuracy cut-offs")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  eval->add_option("--tau", eval_args.tau)->check(CLI::PositiveNumber);
  eval->add_option("--epsilon-scale", eval_args.epsilon_scale)
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--samples", eval_args.samples)->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_args.seed);
  eval->add_flag("--random-baseline", eval_args.random_baseline);
  eval->add_flag("--json", eval_args.json_output);

  // bench
  BenchArgs bench_args;
  std::string scratch_dir;
  auto* bench = app.add_subcommand("bench", "Time scoring of one query");
  bench->add_option("--snapshot", bench_args.snapshot, "Score this snapshot");
  bench->add_option("--count", bench_args.options.count, "Simulated models")
      ->check(CLI::PositiveNumber);
  bench->add_option("--dim", bench_args.options.dim)->check(CLI::PositiveNumber);
  bench->add_option("--method", bench_args.method)->check(CLI::IsMember(methods));
  bench->add_option("--repetitions", bench_args.options.repetitions)
      ->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bench_args.options.warmup);
  bench->add_option("--seed", bench_args.options.seed);
  bench->add_option("--noise-amplitude", bench_args.options.noise_amplitude)
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--tau", bench_args.tau)->check(CLI::PositiveNumber);
  bench->add_option("--epsilon-scale", bench_args.epsilon_scale)
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--samples", bench_args.samples, "monte_carlo samples per model")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--allow-streaming", bench_args.options.allow_streaming,
                  "Stream the store from disk when it does not fit in memory");
  bench->add_option("--scratch-dir", scratch_dir);
  std::optional<std::size_t> budget_mib;
  bench->add_option("--memory-budget-mib", budget_mib,
                    "Store budget; default is available memory")
      ->check(CLI::NonNegativeNumber);
  bench->add_flag("--json", bench_args.json_output);

  // serve
  std::optional<fs::path> serve_config;
  std::optional<fs::path> serve_snapshot;
  std::optional<std::string> serve_listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP search service");
  serve->add_option("--config", serve_config, "JSON config file");
  serve->add_option("--snapshot", serve_snapshot);
  serve->add_option("--listen", serve_listen, "host:port");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim, sim_out, out);
    if (*ingest) {
      ingest_options.config.normalize = !no_normalize;
      return cmd_ingest(ingest_input, ingest_snapshot, ingest_options, out, err);
    }
    if (*search_cmd) return cmd_search(search_args, out);
    if (*eval) return cmd_eval(eval_args, out);
    if (*bench) {
      if (bench_args.method == "frechet") {
        err << "error: bench needs a query-scoring method\n";
        return 2;
      }
      if (!scratch_dir.empty()) bench_args.options.scratch_dir = scratch_dir;
      if (budget_mib) bench_args.options.memory_budget = *budget_mib << 20;
      return cmd_bench(std::move(bench_args), out);
    }
    if (*serve) return cmd_serve(serve_config, serve_snapshot, serve_listen, out);
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace modelsearch
