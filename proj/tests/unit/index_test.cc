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
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "modelsearch/index.h"
#include "test_util.h"

namespace modelsearch {
namespace {

using testing::isotropic;
using testing::make_stats;
using testing::random_feature;
using testing::random_psd;
using testing::random_unit;

ModelRecord record_of(ModelStatistics stats, std::vector<std::string> labels = {}) {
  const std::string id = stats.model_id();
  return ModelRecord{id, id, "", std::move(labels), std::move(stats), {}, std::nullopt};
}

IndexSnapshot random_snapshot(Rng& rng, std::size_t count, std::size_t dim,
                              std::size_t samples = 0) {
  std::vector<ModelRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<float> rows;
    for (std::size_t s = 0; s < samples; ++s) {
      for (double x : random_unit(rng, dim)) rows.push_back(static_cast<float>(x));
    }
    records.push_back(record_of(make_stats("model-" + std::to_string(i),
                                           random_unit(rng, dim),
                                           random_psd(rng, dim, 0.02),
                                           std::max<std::size_t>(samples, 1),
                                           std::move(rows))));
  }
  return IndexSnapshot::build(std::move(records), IndexConfig{});
}

std::vector<std::string> ids_of(const std::vector<RankedResult>& results) {
  std::vector<std::string> ids;
  for (const auto& r : results) ids.push_back(r.model_id);
  return ids;
}

TEST_CASE("build validates ids and dims") {
  auto make = [](std::string id, std::size_t dim) {
    return record_of(isotropic(std::move(id), std::vector<double>(dim, 0.5), 0.1));
  };
  CHECK_ERROR_CODE(IndexSnapshot::build({make("", 2)}, {}), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(IndexSnapshot::build({make(std::string(129, 'x'), 2)}, {}),
                   ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(IndexSnapshot::build({make(std::string(128, 'x'), 2)}, {}));
  CHECK_ERROR_CODE(IndexSnapshot::build({make("a", 2), make("a", 2)}, {}),
                   ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(IndexSnapshot::build({make("a", 2), make("b", 3)}, {}),
                   ErrorCode::kDimensionMismatch);
  CHECK_ERROR_CODE(IndexSnapshot::build({make("a", 2)}, {.tau = 0.0}),
                   ErrorCode::kInvalidArgument);
}

TEST_CASE("build sorts labels, quantizes and caches factors") {
  ModelRecord r = record_of(isotropic("m", {0.1, 0.2}, 0.3), {"b", "a", "b"});
  const IndexSnapshot snapshot = IndexSnapshot::build({r}, {.epsilon_scale = 1e-3}, 7);
  CHECK(snapshot.version() == 7);
  CHECK(snapshot.dim() == 2);
  const ModelRecord& stored = snapshot.at("m");
  CHECK(stored.labels == std::vector<std::string>{"a", "b"});
  CHECK(stored.statistics.mean()[0] == static_cast<double>(0.1f));
  REQUIRE(stored.statistics.cached_cholesky().has_value());
  CHECK(stored.statistics.cached_cholesky()->epsilon_scale == 1e-3);
  CHECK_ERROR_CODE(snapshot.at("missing"), ErrorCode::kUnknownModelId);
  CHECK_FALSE(snapshot.find("missing").has_value());
}

TEST_CASE("rank_models examples") {
  const std::vector<std::string> ids{"a", "b", "c"};
  const std::vector<double> scores{0.2, 0.9, 0.5};
  const auto top2 = rank_models(ids, scores, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].model_id == "b");
  CHECK(top2[0].score == 0.9);
  CHECK(top2[0].rank == 1);
  CHECK(top2[1].model_id == "c");
  CHECK(top2[1].score == 0.5);
  CHECK(top2[1].rank == 2);

  const auto all = rank_models(ids, scores, 10);
  CHECK(ids_of(all) == std::vector<std::string>{"b", "c", "a"});

  const std::vector<std::string> tied{"z", "a"};
  const std::vector<double> same{1.0, 1.0};
  CHECK(ids_of(rank_models(tied, same, 2)) == std::vector<std::string>{"a", "z"});

  CHECK_ERROR_CODE(rank_models(ids, scores, 0), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(rank_models(ids, std::vector<double>{1.0}, 1), ErrorCode::kLengthMismatch);
}

TEST_CASE("rankings are a strict total order and prefixes agree") {
  Rng rng(13);
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (int i = 0; i < 60; ++i) {
    ids.push_back("id" + std::to_string(rng.below(1000)) + "-" + std::to_string(i));
    scores.push_back(static_cast<double>(rng.below(7)));
  }
  const auto full = rank_models(ids, scores, ids.size());
  for (std::size_t i = 1; i < full.size(); ++i) {
    const bool ordered = full[i - 1].score > full[i].score ||
                         (full[i - 1].score == full[i].score &&
                          full[i - 1].model_id < full[i].model_id);
    CHECK(ordered);
    CHECK(full[i].rank == i + 1);
  }
  const std::vector<std::string> full_ids = ids_of(full);
  for (std::size_t k : {1, 5, 17, 60}) {
    const auto top = rank_models(ids, scores, k);
    CHECK(ids_of(top) == std::vector<std::string>(
                             full_ids.begin(), full_ids.begin() + static_cast<std::ptrdiff_t>(k)));
  }
}

TEST_CASE("single-query search equals the argsort of direct scores") {
  Rng rng(22);
  const IndexSnapshot snapshot = random_snapshot(rng, 25, 10, 8);
  const NormalizedFeature q = random_feature(rng, 10);
  for (const ScoreMethod& method :
       {ScoreMethod::first_moment(), ScoreMethod::first_second_moment(),
        ScoreMethod::gaussian_density(), ScoreMethod::monte_carlo(8)}) {
    CAPTURE(method.name());
    std::vector<double> direct;
    for (const auto& r : snapshot.records()) direct.push_back(score_model(q, r.statistics, method));
    const std::vector<Query> queries{Query::feature(q)};
    const auto results = search(snapshot, queries, method, snapshot.size());
    REQUIRE(results.size() == snapshot.size());
    const auto expected = rank_models(snapshot, direct, snapshot.size());
    CHECK(ids_of(results) == ids_of(expected));
    for (std::size_t i = 0; i < results.size(); ++i) {
      CHECK(results[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("a model's own mean ranks it first under the first moment") {
  Rng rng(3);
  const IndexSnapshot snapshot = random_snapshot(rng, 40, 16);
  for (const auto& record : snapshot.records()) {
    const std::vector<Query> queries{Query::model(record.model_id)};
    const auto top = search(snapshot, queries, ScoreMethod::first_moment(), 1);
    CHECK(top.front().model_id == record.model_id);
    CHECK(top.front().score == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("multi-query search replays the product of experts") {
  const std::vector<ModelRecord> records{record_of(isotropic("one", {0.9, 0.1}, 0.1)),
                                         record_of(isotropic("two", {0.1, 0.9}, 0.1))};
  const IndexSnapshot snapshot = IndexSnapshot::build(records, {});
  const NormalizedFeature text = normalize(std::vector<double>{1.0, 0.2});
  const NormalizedFeature image = normalize(std::vector<double>{0.3, 1.0});
  const ScoreMethod method = ScoreMethod::first_moment(0.05);
  const std::vector<Query> queries{Query::feature(text, 1.0), Query::feature(image, 0.7)};
  const auto fused = search(snapshot, queries, method, 2);

  std::vector<WeightedScores> oracle;
  for (const auto& [f, w] : {std::pair{text, 1.0}, std::pair{image, 0.7}}) {
    WeightedScores s{{}, w};
    for (const auto& r : snapshot.records()) {
      s.log_scores.push_back(first_moment_score(f, r.statistics) / 0.05);
    }
    oracle.push_back(s);
  }
  const auto expected = rank_models(snapshot, poe_combine(oracle), 2);
  CHECK(ids_of(fused) == ids_of(expected));
  for (std::size_t i = 0; i < fused.size(); ++i) {
    CHECK(fused[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
  }
}

TEST_CASE("search errors") {
  Rng rng(1);
  const IndexSnapshot snapshot = random_snapshot(rng, 5, 4);
  const NormalizedFeature q = random_feature(rng, 4);
  const std::vector<Query> one{Query::feature(q)};
  CHECK_ERROR_CODE(search(snapshot, {}, ScoreMethod::first_moment(), 3),
                   ErrorCode::kEmptyQuerySet);
  CHECK_ERROR_CODE(search(snapshot, one, ScoreMethod::first_moment(), 0),
                   ErrorCode::kInvalidArgument);
  const std::vector<Query> zero_weight{Query::feature(q, 0.0)};
  CHECK_ERROR_CODE(search(snapshot, zero_weight, ScoreMethod::first_moment(), 3),
                   ErrorCode::kInvalidArgument);
  const std::vector<Query> wrong_dim{Query::feature(random_feature(rng, 5))};
  CHECK_ERROR_CODE(search(snapshot, wrong_dim, ScoreMethod::first_moment(), 3),
                   ErrorCode::kDimensionMismatch);
  const std::vector<Query> unknown{Query::model("nope")};
  CHECK_ERROR_CODE(search(snapshot, unknown, ScoreMethod::first_moment(), 3),
                   ErrorCode::kUnknownModelId);
  CHECK_ERROR_CODE(search(snapshot, one, ScoreMethod::monte_carlo(4), 3),
                   ErrorCode::kSamplesUnavailable);
  CHECK_ERROR_CODE(search(snapshot, one, ScoreMethod::frechet(), 3),
                   ErrorCode::kInvalidArgument);
  const std::vector<Query> by_id{Query::model("model-0")};
  CHECK_ERROR_CODE(search(snapshot, by_id, ScoreMethod::frechet(), 3),
                   ErrorCode::kNotPrecomputed);
}

TEST_CASE("frechet search routes to the similar list") {
  Rng rng(10);
  const IndexSnapshot snapshot = precompute_similarity(random_snapshot(rng, 6, 4));
  const std::vector<Query> by_id{Query::model("model-2")};
  const auto a = search(snapshot, by_id, ScoreMethod::frechet(), 3);
  const auto b = similar_models(snapshot, "model-2", 3);
  CHECK(ids_of(a) == ids_of(b));
}

TEST_CASE("batched scoring agrees with per-query scoring") {
  Rng rng(27);
  const IndexSnapshot snapshot = random_snapshot(rng, 30, 12, 6);
  std::vector<NormalizedFeature> queries;
  for (int i = 0; i < 9; ++i) queries.push_back(random_feature(rng, 12));
  for (const ScoreMethod& method :
       {ScoreMethod::first_moment(), ScoreMethod::first_second_moment(0.1),
        ScoreMethod::gaussian_density(), ScoreMethod::monte_carlo(6)}) {
    CAPTURE(method.name());
    const auto batch = score_batch(snapshot, queries, method);
    REQUIRE(batch.size() == queries.size() * snapshot.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto single = score_all(snapshot, queries[q], method);
      for (std::size_t m = 0; m < snapshot.size(); ++m) {
        const double a = batch[q * snapshot.size() + m];
        CHECK(std::abs(a - single[m]) <= 1e-9 * std::max(1.0, std::abs(single[m])));
      }
    }
  }
}

TEST_CASE("larger k extends the ranking without reordering it") {
  Rng rng(14);
  const IndexSnapshot snapshot = random_snapshot(rng, 30, 6);
  const std::vector<Query> queries{Query::feature(random_feature(rng, 6))};
  const auto full = search(snapshot, queries, ScoreMethod::gaussian_density(), 30);
  for (std::size_t k = 1; k <= 30; k += 7) {
    const auto top = search(snapshot, queries, ScoreMethod::gaussian_density(), k);
    for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i].model_id == full[i].model_id);
  }
}

TEST_CASE("similar models on a duplicate and a line") {
  const ModelStatistics base = isotropic("a", {0.2, 0.4}, 0.1);
  std::vector<ModelRecord> records{record_of(base), record_of(base.renamed("a-copy")),
                                   record_of(isotropic("far", {0.9, -0.4}, 0.3))};
  const IndexSnapshot snapshot = precompute_similarity(IndexSnapshot::build(records, {}));
  CHECK(snapshot.version() == 2);
  CHECK(snapshot.similarity_precomputed());
  const auto first = similar_models(snapshot, "a", 1);
  REQUIRE(first.size() == 1);
  CHECK(first[0].model_id == "a-copy");
  CHECK(first[0].score == 0.0);
  for (const auto& record : snapshot.records()) {
    for (const auto& r : similar_models(snapshot, record.model_id, 10)) {
      CHECK(r.model_id != record.model_id);
    }
  }

  const IndexSnapshot line = precompute_similarity(IndexSnapshot::build(
      {record_of(isotropic("p0", {0.0}, 1.0)), record_of(isotropic("p1", {1.0}, 1.0)),
       record_of(isotropic("p10", {10.0}, 1.0))},
      {}));
  CHECK(similar_models(line, "p0", 1).front().model_id == "p1");
  CHECK(similar_models(line, "p10", 1).front().model_id == "p1");
}

TEST_CASE("similar model errors") {
  Rng rng(2);
  const IndexSnapshot plain = random_snapshot(rng, 3, 4);
  CHECK_ERROR_CODE(similar_models(plain, "model-0", 1), ErrorCode::kNotPrecomputed);
  const IndexSnapshot ready = precompute_similarity(plain);
  CHECK_ERROR_CODE(similar_models(ready, "model-9", 1), ErrorCode::kUnknownModelId);
  CHECK_ERROR_CODE(similar_models(ready, "model-0", 0), ErrorCode::kInvalidArgument);
}

TEST_CASE("two-model snapshot lists each other") {
  Rng rng(5);
  const IndexSnapshot snapshot = precompute_similarity(random_snapshot(rng, 2, 3));
  CHECK(snapshot.at("model-0").similar->size() == 1);
  CHECK(snapshot.at("model-0").similar->front().model_id == "model-1");
  CHECK(snapshot.at("model-1").similar->front().model_id == "model-0");
}

TEST_CASE("similar lists match a brute-force oracle") {
  Rng rng(99);
  const IndexSnapshot snapshot = precompute_similarity(random_snapshot(rng, 5, 8));
  for (const auto& record : snapshot.records()) {
    std::vector<SimilarEntry> oracle;
    for (const auto& other : snapshot.records()) {
      if (other.model_id == record.model_id) continue;
      oracle.push_back({other.model_id, frechet_distance(record.statistics, other.statistics)});
    }
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.model_id < b.model_id;
    });
    REQUIRE(record.similar.has_value());
    REQUIRE(record.similar->size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK((*record.similar)[i].model_id == oracle[i].model_id);
      CHECK((*record.similar)[i].distance ==
            doctest::Approx(oracle[i].distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("similar list length follows the config") {
  Rng rng(6);
  std::vector<ModelRecord> records;
  for (int i = 0; i < 8; ++i) {
    records.push_back(record_of(isotropic("m" + std::to_string(i), random_unit(rng, 3), 0.1)));
  }
  const IndexSnapshot snapshot =
      precompute_similarity(IndexSnapshot::build(records, {.similar_count = 3}));
  for (const auto& r : snapshot.records()) CHECK(r.similar->size() == 3);
}

TEST_CASE("snapshot holder publishes without torn reads") {
  Rng rng(8);
  auto first = std::make_shared<const IndexSnapshot>(random_snapshot(rng, 4, 3));
  SnapshotHolder holder(first);
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!done.load()) {
      const auto s = holder.get();
      if (!s || (s->size() != 4 && s->size() != 6) || s->dim() != 3) ++bad;
    }
  });
  for (int i = 0; i < 200; ++i) {
    holder.publish(std::make_shared<const IndexSnapshot>(
        random_snapshot(rng, i % 2 ? 4 : 6, 3)));
  }
  done = true;
  reader.join();
  CHECK(bad.load() == 0);
  CHECK(first->size() == 4);
}

}  // namespace
}  // namespace modelsearch
