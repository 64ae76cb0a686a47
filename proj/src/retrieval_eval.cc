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

#include "modelsearch/retrieval_eval.h"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <unordered_set>

#include "modelsearch/error.h"
#include "modelsearch/simulate.h"

namespace modelsearch {

namespace {

using Exact = boost::multiprecision::cpp_rational;
using boost::multiprecision::cpp_int;

// Nearest double to a non-negative rational, ties to even.
double round_to_double(const Exact& value) {
  cpp_int num = boost::multiprecision::numerator(value);
  const cpp_int den = boost::multiprecision::denominator(value);
  if (num == 0) return 0.0;
  const cpp_int low = cpp_int(1) << 52;
  long exponent = static_cast<long>(boost::multiprecision::msb(num)) -
                  static_cast<long>(boost::multiprecision::msb(den)) - 52;
  cpp_int q;
  cpp_int r;
  cpp_int d;
  auto divide = [&](long e) {
    cpp_int n = num;
    d = den;
    if (e >= 0) {
      d <<= static_cast<unsigned>(e);
    } else {
      n <<= static_cast<unsigned>(-e);
    }
    boost::multiprecision::divide_qr(n, d, q, r);
  };
  divide(exponent);
  if (q < low) divide(--exponent);
  const cpp_int twice = r * 2;
  if (twice > d || (twice == d && (q & 1) != 0)) ++q;
  return std::ldexp(q.convert_to<double>(), static_cast<int>(exponent));
}

Exact exact_average_precision(std::span<const std::string> ranking,
                              const RelevanceJudgment& judgment, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::size_t relevant = judgment.relevant_model_ids.size();
  if (relevant == 0) {
    throw Error(ErrorCode::kEmptyRelevanceSet,
                "query '" + judgment.query_id + "' has no relevant models");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ranking) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kDuplicateInRanking,
                  "ranking for '" + judgment.query_id + "' repeats '" + id +
                      "'");
    }
  }
  const std::size_t depth = std::min(k, ranking.size());
  std::size_t hits = 0;
  Exact sum = 0;
  for (std::size_t j = 0; j < depth; ++j) {
    if (judgment.relevant_model_ids.contains(ranking[j])) {
      ++hits;
      sum += Exact(cpp_int(hits), cpp_int(j + 1));
    }
  }
  return sum / cpp_int(std::min(relevant, k));
}

}  // namespace

double average_precision_at_k(std::span<const std::string> ranking,
                              const RelevanceJudgment& judgment,
                              std::size_t k) {
  return round_to_double(exact_average_precision(ranking, judgment, k));
}

double mean_average_precision(std::span<const RankedQuery> queries,
                              std::size_t k) {
  if (queries.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no queries to average");
  }
  Exact sum = 0;
  for (const auto& q : queries) {
    sum += exact_average_precision(q.ranking, q.judgment, k);
  }
  return round_to_double(sum / cpp_int(queries.size()));
}

double top_k_accuracy(std::span<const RankedQuery> queries, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (queries.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no queries to average");
  }
  std::size_t found = 0;
  for (const auto& q : queries) {
    if (!q.judgment.ground_truth_model_id) {
      throw Error(ErrorCode::kMissingGroundTruth,
                  "query '" + q.judgment.query_id + "' has no ground truth");
    }
    const std::size_t depth = std::min(k, q.ranking.size());
    const auto end = q.ranking.begin() + static_cast<std::ptrdiff_t>(depth);
    if (std::find(q.ranking.begin(), end, *q.judgment.ground_truth_model_id) !=
        end) {
      ++found;
    }
  }
  return static_cast<double>(found) / static_cast<double>(queries.size());
}

RetrievalReport evaluate_rankings(std::string method,
                                  std::span<const RankedQuery> queries,
                                  std::size_t model_count,
                                  std::span<const std::size_t> top_ks) {
  RetrievalReport report;
  report.method = std::move(method);
  report.query_count = queries.size();
  report.model_count = model_count;
  const bool have_truth =
      std::all_of(queries.begin(), queries.end(), [](const RankedQuery& q) {
        return q.judgment.ground_truth_model_id.has_value();
      });
  if (have_truth) {
    for (std::size_t k : top_ks) report.top_k_accuracy[k] = top_k_accuracy(queries, k);
  }
  report.map_at_5 = mean_average_precision(queries, 5);
  report.map_at_10 = mean_average_precision(queries, 10);
  report.map_full = mean_average_precision(queries, std::max<std::size_t>(model_count, 1));
  return report;
}

std::string report_json(std::span<const RetrievalReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json top = nlohmann::json::object();
    for (const auto& [k, v] : r.top_k_accuracy) top["top" + std::to_string(k)] = v;
    out.push_back({{"method", r.method},
                   {"query_count", r.query_count},
                   {"model_count", r.model_count},
                   {"top_k_accuracy", top},
                   {"map@5", r.map_at_5},
                   {"map@10", r.map_at_10},
                   {"map", r.map_full}});
  }
  return out.dump(2);
}

std::string report_table(std::span<const RetrievalReport> reports) {
  std::set<std::size_t> ks;
  std::size_t method_width = 6;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.top_k_accuracy) ks.insert(k);
    method_width = std::max(method_width, r.method.size());
  }
  std::vector<std::string> headers;
  for (std::size_t k : ks) headers.push_back("Top-" + std::to_string(k));
  headers.insert(headers.end(), {"mAP@5", "mAP@10", "mAP"});

  auto pad = [](std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  };
  auto cell = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  constexpr std::size_t kCell = 8;
  std::string out = pad("Method", method_width);
  for (const auto& h : headers) out += "  " + pad(h, kCell);
  out += "\n";
  out += std::string(method_width + headers.size() * (kCell + 2), '-') + "\n";
  for (const auto& r : reports) {
    out += pad(r.method, method_width);
    for (std::size_t k : ks) {
      const auto it = r.top_k_accuracy.find(k);
      out += "  " + pad(it == r.top_k_accuracy.end() ? "-" : cell(it->second), kCell);
    }
    out += "  " + pad(cell(r.map_at_5), kCell);
    out += "  " + pad(cell(r.map_at_10), kCell);
    out += "  " + pad(cell(r.map_full), kCell);
    out += "\n";
  }
  return out;
}

std::set<std::string> same_label_models(const IndexSnapshot& snapshot,
                                        std::string_view model_id) {
  const ModelRecord& query = snapshot.at(model_id);
  std::set<std::string> relevant{query.model_id};
  for (const auto& record : snapshot.records()) {
    for (const auto& label : record.labels) {
      if (std::binary_search(query.labels.begin(), query.labels.end(), label)) {
        relevant.insert(record.model_id);
        break;
      }
    }
  }
  return relevant;
}

std::vector<EvalQuery> self_queries(const IndexSnapshot& snapshot) {
  std::vector<EvalQuery> queries;
  queries.reserve(snapshot.size());
  for (const auto& record : snapshot.records()) {
    queries.push_back(EvalQuery{
        model_query_feature(snapshot, record.model_id),
        RelevanceJudgment{record.model_id,
                          same_label_models(snapshot, record.model_id),
                          record.model_id}});
  }
  return queries;
}

std::vector<EvalQuery> sampled_self_queries(const IndexSnapshot& snapshot,
                                            std::size_t per_model,
                                            std::uint64_t seed) {
  std::vector<EvalQuery> queries;
  queries.reserve(snapshot.size() * per_model);
  const std::size_t dim = snapshot.dim();
  for (std::size_t m = 0; m < snapshot.size(); ++m) {
    const ModelRecord& record = snapshot.record(m);
    const std::set<std::string> relevant =
        same_label_models(snapshot, record.model_id);
    const std::vector<double> draws =
        draw_gaussian_samples(record.statistics, per_model, seed, m);
    for (std::size_t i = 0; i < per_model; ++i) {
      queries.push_back(EvalQuery{
          normalize(std::span<const double>(draws.data() + i * dim, dim)),
          RelevanceJudgment{record.model_id + "#" + std::to_string(i), relevant,
                            record.model_id}});
    }
  }
  return queries;
}

std::vector<RankedQuery> rank_queries(const IndexSnapshot& snapshot,
                                      std::span<const EvalQuery> queries,
                                      const ScoreMethod& method) {
  std::vector<NormalizedFeature> features;
  features.reserve(queries.size());
  for (const auto& q : queries) features.push_back(q.feature);
  const std::vector<double> scores = score_batch(snapshot, features, method);
  const std::size_t n = snapshot.size();
  std::vector<RankedQuery> ranked;
  ranked.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto results = rank_models(
        snapshot, std::span<const double>(scores.data() + q * n, n), n);
    RankedQuery entry{{}, queries[q].judgment};
    entry.ranking.reserve(n);
    for (const auto& r : results) entry.ranking.push_back(r.model_id);
    ranked.push_back(std::move(entry));
  }
  return ranked;
}

RetrievalReport evaluate_method(const IndexSnapshot& snapshot,
                                std::span<const EvalQuery> queries,
                                const ScoreMethod& method,
                                std::span<const std::size_t> top_ks) {
  const auto ranked = rank_queries(snapshot, queries, method);
  return evaluate_rankings(std::string(method.name()), ranked, snapshot.size(),
                           top_ks);
}

RetrievalReport evaluate_random_baseline(const IndexSnapshot& snapshot,
                                         std::span<const EvalQuery> queries,
                                         std::uint64_t seed,
                                         std::span<const std::size_t> top_ks) {
  Rng rng(seed);
  std::vector<RankedQuery> ranked;
  ranked.reserve(queries.size());
  for (const auto& q : queries) {
    RankedQuery entry{{}, q.judgment};
    for (const auto& record : snapshot.records()) entry.ranking.push_back(record.model_id);
    // Fisher-Yates with the portable generator.
    for (std::size_t i = entry.ranking.size(); i > 1; --i) {
      std::swap(entry.ranking[i - 1], entry.ranking[rng.below(i)]);
    }
    ranked.push_back(std::move(entry));
  }
  return evaluate_rankings("random", ranked, snapshot.size(), top_ks);
}

}  // namespace modelsearch
