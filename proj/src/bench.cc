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

#include "modelsearch/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "modelsearch/embedding.h"
#include "modelsearch/error.h"
#include "modelsearch/scoring_store.h"
#include "modelsearch/simulate.h"

namespace modelsearch {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kMemoryHeadroom = std::size_t{256} << 20;
constexpr std::size_t kStreamChunkBytes = std::size_t{64} << 20;
constexpr std::size_t kTopK = 10;
constexpr std::string_view kBenchQueryText = "a photo of a landscape";

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Record of simulated model `index` for `method`; returns the log-det.
double simulated_record(const BenchOptions& options, std::size_t index,
                        std::span<float> record) {
  const std::size_t dim = options.dim;
  switch (options.method.kind) {
    case MethodKind::kFirstMoment: {
      Rng rng = Rng::for_stream(options.seed, index);
      const std::vector<double> mean = simulate_unit_mean(rng, dim);
      for (std::size_t j = 0; j < dim; ++j) record[j] = static_cast<float>(mean[j]);
      return 0.0;
    }
    case MethodKind::kMonteCarlo: {
      // Sample features as unit vectors around the model's mean.
      Rng rng = Rng::for_stream(options.seed, index);
      const std::vector<double> mean = simulate_unit_mean(rng, dim);
      std::vector<double> row(dim);
      for (std::size_t r = 0; r < options.method.sample_count; ++r) {
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          row[j] = mean[j] + rng.normal() / std::sqrt(static_cast<double>(dim));
          norm_sq += row[j] * row[j];
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t j = 0; j < dim; ++j) {
          record[r * dim + j] = static_cast<float>(row[j] * inv);
        }
      }
      return 0.0;
    }
    default: {
      const ModelStatistics stats = quantize_to_storage(
          simulate_model(options.seed, index, dim, options.noise_amplitude));
      return make_store_record(options.method, stats, record);
    }
  }
}

std::vector<double> bench_query(std::size_t dim, TimingSummary& embedding,
                                 std::size_t repetitions) {
  const StubEmbeddingProvider provider(dim);
  std::vector<double> times;
  std::optional<NormalizedFeature> query;
  for (std::size_t i = 0; i < std::max<std::size_t>(repetitions, 1); ++i) {
    const auto start = Clock::now();
    query = provider.embed(Modality::kText, kBenchQueryText);
    times.push_back(elapsed_ms(start));
  }
  embedding = summarize_timings(times);
  return std::vector<double>(query->values().begin(), query->values().end());
}

double select_top_k(const std::vector<double>& scores,
                    std::vector<std::size_t>& order) {
  const auto start = Clock::now();
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(kTopK, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  return elapsed_ms(start);
}

// Runs warm-up plus timed passes of `pass`, which fills `scores`.
template <typename Pass>
void time_passes(const BenchOptions& options, std::vector<double>& scores,
                 Pass&& pass, BenchReport& report) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < options.warmup; ++i) pass();
  std::vector<double> scoring;
  std::vector<double> ranking;
  for (std::size_t i = 0; i < options.repetitions; ++i) {
    const auto start = Clock::now();
    pass();
    scoring.push_back(elapsed_ms(start));
    ranking.push_back(select_top_k(scores, order));
  }
  report.scoring = summarize_timings(scoring);
  report.top_k_selection = summarize_timings(ranking);
}

void run_resident(const BenchOptions& options, std::span<const double> query,
                  BenchReport& report) {
  const auto build_start = Clock::now();
  ScoringStore store(options.method, options.dim);
  store.reserve(options.count);
  std::vector<float> record(store.record_floats());
  for (std::size_t i = 0; i < options.count; ++i) {
    const double logdet = simulated_record(options, i, record);
    store.add_record(record, logdet);
  }
  report.build_seconds = elapsed_ms(build_start) / 1000.0;
  report.peak_store_bytes = store.bytes();
  std::vector<double> scores(options.count);
  time_passes(options, scores, [&] { store.score(query, scores); }, report);
}

void run_streamed(const BenchOptions& options, std::span<const double> query,
                  BenchReport& report) {
  const std::size_t stride = store_record_floats(options.method, options.dim);
  const std::size_t record_bytes = stride * sizeof(float);
  const std::size_t per_chunk = std::max<std::size_t>(1, kStreamChunkBytes / record_bytes);
  const std::filesystem::path path =
      options.scratch_dir /
      ("modelsearch-bench-" + std::to_string(options.seed) + "-" +
       std::to_string(options.count) + ".records");

  struct Cleanup {
    std::filesystem::path path;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  } cleanup{path};

  const auto build_start = Clock::now();
  std::vector<double> logdets(options.count);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path.string());
    std::vector<float> chunk;
    chunk.reserve(per_chunk * stride);
    for (std::size_t i = 0; i < options.count; ++i) {
      const std::size_t offset = chunk.size();
      chunk.resize(offset + stride);
      logdets[i] = simulated_record(options, i,
                                    std::span<float>(chunk.data() + offset, stride));
      if (chunk.size() == per_chunk * stride || i + 1 == options.count) {
        out.write(reinterpret_cast<const char*>(chunk.data()),
                  static_cast<std::streamsize>(chunk.size() * sizeof(float)));
        chunk.clear();
      }
    }
    if (!out.flush()) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  report.build_seconds = elapsed_ms(build_start) / 1000.0;
  report.peak_store_bytes = 2 * per_chunk * record_bytes + logdets.size() * sizeof(double);

  std::vector<double> scores(options.count);
  std::vector<float> buffers[2];
  buffers[0].resize(per_chunk * stride);
  buffers[1].resize(per_chunk * stride);

  auto pass = [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
    const std::size_t chunks = (options.count + per_chunk - 1) / per_chunk;
    auto read_chunk = [&](std::size_t c) {
      const std::size_t models = std::min(per_chunk, options.count - c * per_chunk);
      in.read(reinterpret_cast<char*>(buffers[c % 2].data()),
              static_cast<std::streamsize>(models * record_bytes));
      if (!in) throw Error(ErrorCode::kIoError, "short read from " + path.string());
      return models;
    };
    // Double buffering: the next chunk is read while this one is scored.
    std::future<std::size_t> pending = std::async(std::launch::async, read_chunk, 0);
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t models = pending.get();
      if (c + 1 < chunks) pending = std::async(std::launch::async, read_chunk, c + 1);
      const std::size_t first = c * per_chunk;
      score_store_records(options.method, options.dim, buffers[c % 2].data(),
                          logdets.data() + first, models, query,
                          scores.data() + first);
    }
  };
  time_passes(options, scores, pass, report);
}

}  // namespace

TimingSummary summarize_timings(std::vector<double> samples_ms) {
  TimingSummary summary;
  summary.repetitions = samples_ms.size();
  if (samples_ms.empty()) return summary;
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t n = samples_ms.size();
  summary.median_ms = n % 2 == 1
                          ? samples_ms[n / 2]
                          : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  summary.p95_ms = samples_ms[std::clamp<std::size_t>(rank, 1, n) - 1];
  summary.min_ms = samples_ms.front();
  summary.max_ms = samples_ms.back();
  return summary;
}

std::optional<std::size_t> available_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  std::size_t value = 0;
  std::string unit;
  while (in >> key >> value) {
    std::getline(in, unit);
    if (key == "MemAvailable:") return value * 1024;
  }
  return std::nullopt;
}

BenchReport run_simulated_bench(const BenchOptions& options) {
  options.method.validate();
  if (options.method.kind == MethodKind::kFrechet) {
    throw Error(ErrorCode::kMethodUnavailable,
                "frechet compares models with each other, not with a query");
  }
  if (options.count == 0 || options.dim == 0 || options.repetitions == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "bench needs count, dim and repetitions >= 1");
  }
  if (!(options.noise_amplitude >= 0.0 && options.noise_amplitude < 1.0)) {
    throw Error(ErrorCode::kInvalidAmplitude, "noise amplitude must be in [0, 1)");
  }
  BenchReport report;
  report.method = std::string(options.method.name());
  report.count = options.count;
  report.dim = options.dim;
  const std::size_t stride = store_record_floats(options.method, options.dim);
  report.store_bytes =
      options.count * stride * sizeof(float) +
      (options.method.kind == MethodKind::kGaussianDensity ? options.count * sizeof(double) : 0);
  if (options.memory_budget) {
    report.memory_budget_bytes = *options.memory_budget;
  } else {
    const std::size_t available = available_memory_bytes().value_or(0);
    report.memory_budget_bytes = available > kMemoryHeadroom ? available - kMemoryHeadroom : 0;
  }

  const std::vector<double> query =
      bench_query(options.dim, report.embedding, options.repetitions);

  if (report.store_bytes <= report.memory_budget_bytes) {
    report.mode = "resident";
    run_resident(options, query, report);
    return report;
  }
  report.single_pass_out_of_memory = true;
  char note[160];
  std::snprintf(note, sizeof(note),
                "store needs %.2f GiB, budget is %.2f GiB",
                static_cast<double>(report.store_bytes) / (1 << 30),
                static_cast<double>(report.memory_budget_bytes) / (1 << 30));
  report.note = note;
  if (!options.allow_streaming) {
    report.mode = "out_of_memory";
    return report;
  }
  report.mode = "streamed";
  run_streamed(options, query, report);
  return report;
}

BenchReport run_snapshot_bench(const IndexSnapshot& snapshot,
                               const ScoreMethod& method,
                               std::size_t repetitions, std::size_t warmup) {
  if (snapshot.size() == 0) throw Error(ErrorCode::kInvalidArgument, "snapshot is empty");
  if (repetitions == 0) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  BenchOptions options;
  options.count = snapshot.size();
  options.dim = snapshot.dim();
  options.method = method;
  options.repetitions = repetitions;
  options.warmup = warmup;

  BenchReport report;
  report.method = std::string(method.name());
  report.count = snapshot.size();
  report.dim = snapshot.dim();
  report.mode = "resident";
  const std::vector<double> query = bench_query(options.dim, report.embedding, repetitions);

  const auto build_start = Clock::now();
  ScoringStore store(method, snapshot.dim());
  store.reserve(snapshot.size());
  for (const auto& record : snapshot.records()) store.add(record.statistics);
  report.build_seconds = elapsed_ms(build_start) / 1000.0;
  report.store_bytes = store.bytes();
  report.peak_store_bytes = store.bytes();
  report.memory_budget_bytes = available_memory_bytes().value_or(0);
  std::vector<double> scores(snapshot.size());
  time_passes(options, scores, [&] { store.score(query, scores); }, report);
  return report;
}

std::string bench_report_json(const BenchReport& report) {
  auto timing = [](const std::optional<TimingSummary>& t) -> nlohmann::json {
    if (!t) return nullptr;
    return {{"repetitions", t->repetitions},
            {"median_ms", t->median_ms},
            {"p95_ms", t->p95_ms},
            {"min_ms", t->min_ms},
            {"max_ms", t->max_ms}};
  };
  nlohmann::json out{{"method", report.method},
                     {"count", report.count},
                     {"dim", report.dim},
                     {"mode", report.mode},
                     {"single_pass_out_of_memory", report.single_pass_out_of_memory},
                     {"store_bytes", report.store_bytes},
                     {"memory_budget_bytes", report.memory_budget_bytes},
                     {"peak_store_bytes", report.peak_store_bytes},
                     {"scoring", timing(report.scoring)},
                     {"top_k_selection", timing(report.top_k_selection)},
                     {"embedding", timing(report.embedding)},
                     {"build_seconds", report.build_seconds}};
  if (report.single_pass_out_of_memory) {
    out["error"] = {{"code", error_code_name(ErrorCode::kOutOfMemory)},
                    {"message", report.note}};
  }
  return out.dump(2);
}

std::string bench_report_text(const BenchReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "method %s  models %zu  dim %zu  mode %s\n",
                report.method.c_str(), report.count, report.dim, report.mode.c_str());
  out << line;
  std::snprintf(line, sizeof(line), "store %.1f MiB  peak resident %.1f MiB  build %.2f s\n",
                static_cast<double>(report.store_bytes) / (1 << 20),
                static_cast<double>(report.peak_store_bytes) / (1 << 20),
                report.build_seconds);
  out << line;
  std::snprintf(line, sizeof(line), "query embedding  median %.3f ms\n",
                report.embedding.median_ms);
  out << line;
  if (report.scoring) {
    std::snprintf(line, sizeof(line),
                  "model scoring    median %.3f ms  p95 %.3f ms  (%zu runs)\n",
                  report.scoring->median_ms, report.scoring->p95_ms,
                  report.scoring->repetitions);
    out << line;
    std::snprintf(line, sizeof(line), "top-%zu selection median %.3f ms\n", kTopK,
                  report.top_k_selection->median_ms);
    out << line;
  }
  if (report.single_pass_out_of_memory) out << "single pass: OOM (" << report.note << ")\n";
  return out.str();
}

}  // namespace modelsearch
