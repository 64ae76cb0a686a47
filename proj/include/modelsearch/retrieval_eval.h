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

// Retrieval metrics (top-k accuracy, AP@k, mAP@k) and an evaluation harness
// that runs labelled queries against a snapshot.
//
// AP@k sums precision at every relevant position j = 1..k and divides by
// min(#relevant, k). Ranks past the end of a short ranking count as
// irrelevant.

#ifndef MODELSEARCH_RETRIEVAL_EVAL_H_
#define MODELSEARCH_RETRIEVAL_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "modelsearch/index.h"
#include "modelsearch/random.h"
#include "modelsearch/scoring.h"

namespace modelsearch {

struct RelevanceJudgment {
  std::string query_id;
  std::set<std::string> relevant_model_ids;
  // For top-k accuracy; must be in relevant_model_ids when set.
  std::optional<std::string> ground_truth_model_id;
};

struct RankedQuery {
  std::vector<std::string> ranking;
  RelevanceJudgment judgment;
};

// Metrics are accumulated exactly and rounded once to the nearest double.

// Throws EmptyRelevanceSet, DuplicateInRanking, InvalidArgument (k == 0).
double average_precision_at_k(std::span<const std::string> ranking,
                              const RelevanceJudgment& judgment, std::size_t k);

// Mean of AP@k over the queries.
double mean_average_precision(std::span<const RankedQuery> queries,
                              std::size_t k);

// Fraction of queries whose ground truth is within the first k ranks.
// Throws MissingGroundTruth.
double top_k_accuracy(std::span<const RankedQuery> queries, std::size_t k);

struct RetrievalReport {
  std::string method;
  std::size_t query_count = 0;
  std::size_t model_count = 0;
  // Empty when the queries carry no ground-truth model.
  std::map<std::size_t, double> top_k_accuracy;
  double map_at_5 = 0.0;
  double map_at_10 = 0.0;
  // mAP with k = model_count.
  double map_full = 0.0;
};

inline constexpr std::size_t kDefaultTopKs[] = {1, 5, 10};

RetrievalReport evaluate_rankings(std::string method,
                                  std::span<const RankedQuery> queries,
                                  std::size_t model_count,
                                  std::span<const std::size_t> top_ks =
                                      kDefaultTopKs);

std::string report_json(std::span<const RetrievalReport> reports);
// Aligned text table: one row per method, Top-k columns then mAP columns.
std::string report_table(std::span<const RetrievalReport> reports);

// A query feature with its judgment.
struct EvalQuery {
  NormalizedFeature feature;
  RelevanceJudgment judgment;
};

// Models sharing at least one label with `model_id` (itself included).
std::set<std::string> same_label_models(const IndexSnapshot& snapshot,
                                        std::string_view model_id);

// One query per model at its normalized mean; ground truth is the model.
std::vector<EvalQuery> self_queries(const IndexSnapshot& snapshot);

// `per_model` queries per model drawn from N(mu, Sigma) of that model and
// normalized; ground truth is the model.
std::vector<EvalQuery> sampled_self_queries(const IndexSnapshot& snapshot,
                                            std::size_t per_model,
                                            std::uint64_t seed);

// Full rankings of every query under `method`.
std::vector<RankedQuery> rank_queries(const IndexSnapshot& snapshot,
                                      std::span<const EvalQuery> queries,
                                      const ScoreMethod& method);

RetrievalReport evaluate_method(const IndexSnapshot& snapshot,
                                std::span<const EvalQuery> queries,
                                const ScoreMethod& method,
                                std::span<const std::size_t> top_ks =
                                    kDefaultTopKs);

// Uniformly random permutation of the snapshot's ids for every query.
RetrievalReport evaluate_random_baseline(const IndexSnapshot& snapshot,
                                         std::span<const EvalQuery> queries,
                                         std::uint64_t seed,
                                         std::span<const std::size_t> top_ks =
                                             kDefaultTopKs);

}  // namespace modelsearch

#endif  // MODELSEARCH_RETRIEVAL_EVAL_H_
