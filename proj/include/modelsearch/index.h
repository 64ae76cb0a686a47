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

// The searchable model collection.
//
// An IndexSnapshot is immutable once built and can be shared freely between
// threads. Mutation happens by building a new snapshot and publishing it
// through a SnapshotHolder; readers that already hold the old snapshot keep
// using it until they drop their reference.

#ifndef MODELSEARCH_INDEX_H_
#define MODELSEARCH_INDEX_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "modelsearch/feature_stats.h"
#include "modelsearch/scoring.h"

namespace modelsearch {

inline constexpr std::size_t kMaxModelIdBytes = 128;
inline constexpr std::size_t kDefaultSimilarCount = 20;

struct IndexConfig {
  double tau = kDefaultTau;
  double epsilon_scale = kDefaultEpsilonScale;
  bool normalize = true;
  // Length of each record's precomputed similar-model list.
  std::size_t similar_count = kDefaultSimilarCount;
};

struct SimilarEntry {
  std::string model_id;
  double distance = 0.0;

  bool operator==(const SimilarEntry&) const = default;
};

struct ModelRecord {
  std::string model_id;
  std::string display_name;
  std::string description;
  // Ground-truth categories; kept sorted and unique.
  std::vector<std::string> labels;
  ModelStatistics statistics;
  std::vector<std::string> thumbnail_uris;
  // Nearest models by Frechet distance, ascending, self excluded.
  std::optional<std::vector<SimilarEntry>> similar;
};

struct RankedResult {
  std::string model_id;
  double score = 0.0;
  // 1-based.
  std::size_t rank = 0;
};

class IndexSnapshot {
 public:
  // Validates ids (unique, non-empty, <= 128 bytes) and dims, rounds the
  // statistics to float32 storage precision and caches each model's
  // regularized Cholesky factor for config.epsilon_scale.
  static IndexSnapshot build(std::vector<ModelRecord> records,
                             IndexConfig config, std::uint64_t version = 1);

  std::uint64_t version() const { return version_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  const IndexConfig& config() const { return config_; }
  std::span<const ModelRecord> records() const { return records_; }
  const ModelRecord& record(std::size_t index) const { return records_[index]; }

  std::optional<std::size_t> find(std::string_view model_id) const;
  // Throws UnknownModelId.
  const ModelRecord& at(std::string_view model_id) const;

  // Smallest number of cached samples over all records (0 if any has none).
  std::size_t min_cached_samples() const;
  bool similarity_precomputed() const;

 private:
  IndexSnapshot() = default;

  std::uint64_t version_ = 0;
  std::size_t dim_ = 0;
  IndexConfig config_;
  std::vector<ModelRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// One query term: an embedded feature or the id of an indexed model.
struct Query {
  std::variant<NormalizedFeature, std::string> target;
  double weight = 1.0;

  static Query feature(NormalizedFeature f, double weight = 1.0) {
    return Query{std::move(f), weight};
  }
  static Query model(std::string model_id, double weight = 1.0) {
    return Query{std::move(model_id), weight};
  }
};

// Sorts by score descending, ties by model_id ascending, and returns the
// first min(k, n). Throws LengthMismatch when the lengths differ.
std::vector<RankedResult> rank_models(std::span<const std::string> model_ids,
                                      std::span<const double> scores,
                                      std::size_t k);
std::vector<RankedResult> rank_models(const IndexSnapshot& snapshot,
                                      std::span<const double> scores,
                                      std::size_t k);

// Scores of every model in snapshot order for one query.
std::vector<double> score_all(const IndexSnapshot& snapshot,
                              const NormalizedFeature& query,
                              const ScoreMethod& method);

// Row-major [query][model] scores for many queries. Uses blocked dense
// linear algebra; agrees with score_all up to rounding.
std::vector<double> score_batch(const IndexSnapshot& snapshot,
                                std::span<const NormalizedFeature> queries,
                                const ScoreMethod& method);

// The normalized mean of a model, used when a model id is the query.
NormalizedFeature model_query_feature(const IndexSnapshot& snapshot,
                                      std::string_view model_id);

// Scores every model under `method` and ranks. A single query reports the
// method's own score; several queries are fused with poe_combine on the
// log-likelihood scale. With kFrechet the only query must be a model id and
// the call is answered by similar_models.
std::vector<RankedResult> search(const IndexSnapshot& snapshot,
                                 std::span<const Query> queries,
                                 const ScoreMethod& method, std::size_t k);

// First k entries of the precomputed list; score = -distance.
std::vector<RankedResult> similar_models(const IndexSnapshot& snapshot,
                                         std::string_view model_id,
                                         std::size_t k);

// New snapshot (version + 1) whose records carry their similar lists,
// computed from all pairwise Frechet distances.
IndexSnapshot precompute_similarity(const IndexSnapshot& snapshot);

// Atomically replaceable pointer to the current snapshot.
class SnapshotHolder {
 public:
  SnapshotHolder() = default;
  explicit SnapshotHolder(std::shared_ptr<const IndexSnapshot> initial)
      : current_(std::move(initial)) {}

  std::shared_ptr<const IndexSnapshot> get() const {
    return std::atomic_load(&current_);
  }
  void publish(std::shared_ptr<const IndexSnapshot> next) {
    std::atomic_store(&current_, std::move(next));
  }

 private:
  std::shared_ptr<const IndexSnapshot> current_;
};

}  // namespace modelsearch

#endif  // MODELSEARCH_INDEX_H_
