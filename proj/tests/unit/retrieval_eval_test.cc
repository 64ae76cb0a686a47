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

#include <doctest.h>

#include <algorithm>
#include <boost/rational.hpp>
#include <json.hpp>
#include <numeric>

#include "modelsearch/retrieval_eval.h"
#include "modelsearch/simulate.h"
#include "test_util.h"

namespace modelsearch {
namespace {

using Rational = boost::rational<long long>;

RelevanceJudgment judge(std::set<std::string> relevant,
                        std::optional<std::string> truth = std::nullopt) {
  return RelevanceJudgment{"q", std::move(relevant), std::move(truth)};
}

TEST_CASE("average precision examples") {
  const std::vector<std::string> ranking{"a", "x", "b", "y", "z"};
  CHECK(average_precision_at_k(ranking, judge({"a", "b"}), 10) ==
        doctest::Approx(0.5 * (1.0 + 2.0 / 3.0)).epsilon(1e-15));
  CHECK(average_precision_at_k(std::vector<std::string>{"a", "b", "x"}, judge({"a", "b"}), 10) ==
        1.0);
  CHECK(average_precision_at_k(ranking, judge({"z"}), 3) == 0.0);
  // The normalizer is capped at k.
  CHECK(average_precision_at_k(std::vector<std::string>{"a", "b"}, judge({"a", "b", "c"}), 2) ==
        1.0);
  // Relevant models absent from a short ranking count as misses.
  CHECK(average_precision_at_k(std::vector<std::string>{"a"}, judge({"a", "b"}), 10) == 0.5);
}

TEST_CASE("average precision errors") {
  const std::vector<std::string> ranking{"a", "b"};
  CHECK_ERROR_CODE(average_precision_at_k(ranking, judge({}), 5),
                   ErrorCode::kEmptyRelevanceSet);
  CHECK_ERROR_CODE(average_precision_at_k(ranking, judge({"a"}), 0),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(
      average_precision_at_k(std::vector<std::string>{"a", "b", "a"}, judge({"a"}), 5),
      ErrorCode::kDuplicateInRanking);
}

TEST_CASE("mean average precision and top-k examples") {
  const std::vector<RankedQuery> mixed{{{"a", "b"}, judge({"a"})}, {{"a", "b"}, judge({"b"})}};
  CHECK(mean_average_precision(mixed, 1) == 0.5);
  const std::vector<RankedQuery> perfect{{{"a", "b"}, judge({"a"})}, {{"b", "a"}, judge({"b"})}};
  CHECK(mean_average_precision(perfect, 10) == 1.0);
  CHECK_ERROR_CODE(mean_average_precision({}, 5), ErrorCode::kInvalidArgument);

  auto at_rank = [](std::size_t rank) {
    std::vector<std::string> ranking;
    for (std::size_t i = 1; i <= 12; ++i) ranking.push_back("m" + std::to_string(i));
    return RankedQuery{ranking, judge({"m" + std::to_string(rank)}, "m" + std::to_string(rank))};
  };
  const std::vector<RankedQuery> first{at_rank(1), at_rank(1)};
  for (std::size_t k : {1, 5, 10}) CHECK(top_k_accuracy(first, k) == 1.0);
  const std::vector<RankedQuery> sixth{at_rank(6)};
  CHECK(top_k_accuracy(sixth, 5) == 0.0);
  CHECK(top_k_accuracy(sixth, 10) == 1.0);
  const std::vector<RankedQuery> batch{at_rank(1), at_rank(3), at_rank(7), at_rank(12)};
  CHECK(top_k_accuracy(batch, 5) == 0.5);

  const std::vector<RankedQuery> no_truth{{{"a"}, judge({"a"})}};
  CHECK_ERROR_CODE(top_k_accuracy(no_truth, 1), ErrorCode::kMissingGroundTruth);
  CHECK_ERROR_CODE(top_k_accuracy(first, 0), ErrorCode::kInvalidArgument);
}

// Exact AP@k over the definition, in rational arithmetic.
Rational rational_ap(const std::vector<std::string>& ranking,
                     const std::set<std::string>& relevant, std::size_t k) {
  Rational sum = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (j > ranking.size() || !relevant.contains(ranking[j - 1])) continue;
    long long hits = 0;
    for (std::size_t i = 1; i <= j; ++i) hits += relevant.contains(ranking[i - 1]) ? 1 : 0;
    sum += Rational(hits, static_cast<long long>(j));
  }
  return sum / static_cast<long long>(std::min(relevant.size(), k));
}

TEST_CASE("average precision matches an exact rational oracle") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<std::string> ranking;
    for (std::size_t i = 0; i < n; ++i) ranking.push_back("m" + std::to_string(i));
    for (std::size_t i = n; i > 1; --i) std::swap(ranking[i - 1], ranking[rng.below(i)]);
    std::set<std::string> relevant;
    const std::size_t count = 1 + rng.below(n);
    while (relevant.size() < count) relevant.insert("m" + std::to_string(rng.below(n)));
    const std::size_t k = 1 + rng.below(n + 5);
    const Rational exact = rational_ap(ranking, relevant, k);
    const double got = average_precision_at_k(ranking, judge(relevant), k);
    CHECK(std::abs(got - boost::rational_cast<double>(exact)) <= 1e-12);
  }
}

TEST_CASE("swapping a relevant model upward never lowers AP") {
  Rng rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    std::vector<std::string> ranking;
    for (std::size_t i = 0; i < n; ++i) ranking.push_back("m" + std::to_string(i));
    std::set<std::string> relevant;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.4) relevant.insert(ranking[i]);
    }
    if (relevant.empty()) relevant.insert(ranking[n - 1]);
    const std::size_t k = 1 + rng.below(n);
    for (std::size_t j = 1; j < n; ++j) {
      if (!relevant.contains(ranking[j]) || relevant.contains(ranking[j - 1])) continue;
      std::vector<std::string> swapped = ranking;
      std::swap(swapped[j], swapped[j - 1]);
      CHECK(average_precision_at_k(swapped, judge(relevant), k) >=
            average_precision_at_k(ranking, judge(relevant), k) - 1e-15);
    }
  }
}

TEST_CASE("full-depth AP equals classical average precision") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(25);
    std::vector<std::string> ranking;
    for (std::size_t i = 0; i < n; ++i) ranking.push_back("m" + std::to_string(i));
    std::set<std::string> relevant{ranking[rng.below(n)]};
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.3) relevant.insert(ranking[i]);
    }
    // Classical AP: mean of precision at each relevant position.
    double classical = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (relevant.contains(ranking[i])) {
        ++hits;
        classical += static_cast<double>(hits) / static_cast<double>(i + 1);
      }
    }
    classical /= static_cast<double>(relevant.size());
    CHECK(average_precision_at_k(ranking, judge(relevant), n) ==
          doctest::Approx(classical).epsilon(1e-14));
  }
}

TEST_CASE("report formats") {
  RetrievalReport r;
  r.method = "gaussian_density";
  r.query_count = 4;
  r.model_count = 9;
  r.top_k_accuracy = {{1, 0.75}, {5, 1.0}};
  r.map_at_5 = 0.5;
  r.map_at_10 = 0.625;
  r.map_full = 0.6;
  const std::vector<RetrievalReport> reports{r};
  const auto json = nlohmann::json::parse(report_json(reports));
  REQUIRE(json.is_array());
  CHECK(json[0]["method"] == "gaussian_density");
  CHECK(json[0]["top_k_accuracy"]["top1"] == 0.75);
  CHECK(json[0]["map@10"] == 0.625);
  CHECK(json[0]["model_count"] == 9);
  const std::string table = report_table(reports);
  CHECK(table.find("Top-1") != std::string::npos);
  CHECK(table.find("mAP@10") != std::string::npos);
  CHECK(table.find("0.7500") != std::string::npos);
  CHECK(table.find("0.6250") != std::string::npos);
}

IndexSnapshot zoo_snapshot(std::size_t clusters, std::size_t per_cluster, std::size_t dim,
                           std::uint64_t seed) {
  const ClusteredZoo zoo = simulate_clustered_zoo(clusters, per_cluster, dim, 0.5, 0.05, seed);
  std::vector<ModelRecord> records;
  for (std::size_t i = 0; i < zoo.models.size(); ++i) {
    const std::string& id = zoo.models[i].model_id();
    records.push_back(
        ModelRecord{id, id, "", {zoo.labels[i]}, zoo.models[i], {}, std::nullopt});
  }
  return IndexSnapshot::build(std::move(records), IndexConfig{});
}

TEST_CASE("self queries on a separated zoo are retrieved first") {
  const IndexSnapshot snapshot = zoo_snapshot(4, 5, 32, 3);
  const auto queries = self_queries(snapshot);
  CHECK(queries.size() == 20);
  CHECK(queries[0].judgment.relevant_model_ids.size() == 5);
  const RetrievalReport report =
      evaluate_method(snapshot, queries, ScoreMethod::first_moment());
  CHECK(report.top_k_accuracy.at(1) == 1.0);
  CHECK(report.map_at_5 == doctest::Approx(1.0));
}

TEST_CASE("clustered zoo beats the random baseline") {
  const IndexSnapshot snapshot = zoo_snapshot(10, 13, 512, 7);
  const auto queries = sampled_self_queries(snapshot, 2, 11);
  CHECK(queries.size() == 260);
  const RetrievalReport gauss =
      evaluate_method(snapshot, queries, ScoreMethod::gaussian_density());
  const RetrievalReport random = evaluate_random_baseline(snapshot, queries, 11);
  CHECK(random.method == "random");
  CHECK(gauss.map_at_10 >= random.map_at_10);
  CHECK(gauss.model_count == 130);
}

TEST_CASE("sampled queries are deterministic and labeled") {
  const IndexSnapshot snapshot = zoo_snapshot(2, 3, 16, 1);
  const auto a = sampled_self_queries(snapshot, 4, 9);
  const auto b = sampled_self_queries(snapshot, 4, 9);
  REQUIRE(a.size() == 24);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::equal(a[i].feature.values().begin(), a[i].feature.values().end(),
                     b[i].feature.values().begin()));
  }
  CHECK(a[5].judgment.query_id == snapshot.record(1).model_id + "#1");
  CHECK(a[5].judgment.ground_truth_model_id == snapshot.record(1).model_id);
}

TEST_CASE("rankings are full permutations consistent with search") {
  const IndexSnapshot snapshot = zoo_snapshot(3, 4, 24, 5);
  const auto queries = self_queries(snapshot);
  const auto ranked = rank_queries(snapshot, queries, ScoreMethod::gaussian_density());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    REQUIRE(ranked[q].ranking.size() == snapshot.size());
    const std::vector<Query> one{Query::feature(queries[q].feature)};
    const auto direct = search(snapshot, one, ScoreMethod::gaussian_density(), 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ranked[q].ranking[i] == direct[i].model_id);
  }
}

}  // namespace
}  // namespace modelsearch
