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

#include "modelsearch/index.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "modelsearch/error.h"

namespace modelsearch {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd dense_lower(std::span<const double> packed, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      out(i, j) = packed[packed_index(static_cast<std::size_t>(i),
                                      static_cast<std::size_t>(j))];
    }
  }
  return out;
}

bool ranks_before(double score_a, std::string_view id_a, double score_b,
                  std::string_view id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

void check_k(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
}

}  // namespace

IndexSnapshot IndexSnapshot::build(std::vector<ModelRecord> records,
                                   IndexConfig config, std::uint64_t version) {
  if (!(config.tau > 0.0) || !(config.epsilon_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "index config needs tau > 0 and epsilon_scale >= 0");
  }
  IndexSnapshot snapshot;
  snapshot.version_ = version;
  snapshot.config_ = config;
  snapshot.dim_ = records.empty() ? 0 : records.front().statistics.dim();
  snapshot.by_id_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    ModelRecord& record = records[i];
    if (record.model_id.empty() || record.model_id.size() > kMaxModelIdBytes) {
      throw Error(ErrorCode::kInvalidArgument,
                  "model id must be 1.." + std::to_string(kMaxModelIdBytes) +
                      " bytes: '" + record.model_id + "'");
    }
    if (!snapshot.by_id_.emplace(record.model_id, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate model id '" + record.model_id + "'");
    }
    if (record.statistics.dim() != snapshot.dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "model '" + record.model_id + "' has dim " +
                      std::to_string(record.statistics.dim()) +
                      ", index dim is " + std::to_string(snapshot.dim_));
    }
    std::sort(record.labels.begin(), record.labels.end());
    record.labels.erase(std::unique(record.labels.begin(), record.labels.end()),
                        record.labels.end());
    if (record.similar) {
      for (const auto& entry : *record.similar) {
        if (entry.model_id == record.model_id) {
          throw Error(ErrorCode::kInvalidArgument,
                      "similar list of '" + record.model_id +
                          "' contains itself");
        }
      }
      if (!std::is_sorted(record.similar->begin(), record.similar->end(),
                          [](const SimilarEntry& a, const SimilarEntry& b) {
                            return a.distance < b.distance;
                          })) {
        throw Error(ErrorCode::kInvalidArgument,
                    "similar list of '" + record.model_id +
                        "' is not sorted by distance");
      }
    }
    ModelStatistics stats = quantize_to_storage(
        record.statistics.model_id() == record.model_id
            ? record.statistics
            : record.statistics.renamed(record.model_id));
    regularized_cholesky(stats, config.epsilon_scale);
    record.statistics = std::move(stats);
  }
  snapshot.records_ = std::move(records);
  return snapshot;
}

std::optional<std::size_t> IndexSnapshot::find(std::string_view model_id) const {
  const auto it = by_id_.find(std::string(model_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const ModelRecord& IndexSnapshot::at(std::string_view model_id) const {
  const auto index = find(model_id);
  if (!index) {
    throw Error(ErrorCode::kUnknownModelId,
                "unknown model id '" + std::string(model_id) + "'");
  }
  return records_[*index];
}

std::size_t IndexSnapshot::min_cached_samples() const {
  if (records_.empty()) return 0;
  std::size_t least = records_.front().statistics.cached_sample_rows();
  for (const auto& record : records_) {
    least = std::min(least, record.statistics.cached_sample_rows());
  }
  return least;
}

bool IndexSnapshot::similarity_precomputed() const {
  return std::all_of(records_.begin(), records_.end(),
                     [](const ModelRecord& r) { return r.similar.has_value(); });
}

std::vector<RankedResult> rank_models(std::span<const std::string> model_ids,
                                      std::span<const double> scores,
                                      std::size_t k) {
  check_k(k);
  if (model_ids.size() != scores.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(scores.size()) + " scores for " +
                    std::to_string(model_ids.size()) + " models");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, order.size());
  auto before = [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], model_ids[a], scores[b], model_ids[b]);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), before);
  std::vector<RankedResult> results;
  results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    results.push_back({model_ids[order[i]], scores[order[i]], i + 1});
  }
  return results;
}

std::vector<RankedResult> rank_models(const IndexSnapshot& snapshot,
                                      std::span<const double> scores,
                                      std::size_t k) {
  check_k(k);
  if (scores.size() != snapshot.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(scores.size()) + " scores for " +
                    std::to_string(snapshot.size()) + " models");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, order.size());
  auto before = [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], snapshot.record(a).model_id, scores[b],
                        snapshot.record(b).model_id);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), before);
  std::vector<RankedResult> results;
  results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    results.push_back({snapshot.record(order[i]).model_id, scores[order[i]], i + 1});
  }
  return results;
}

std::vector<double> score_all(const IndexSnapshot& snapshot,
                              const NormalizedFeature& query,
                              const ScoreMethod& method) {
  method.validate();
  if (query.dim() != snapshot.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query dim " + std::to_string(query.dim()) +
                    " does not match index dim " +
                    std::to_string(snapshot.dim()));
  }
  if (method.kind == MethodKind::kMonteCarlo &&
      snapshot.min_cached_samples() < method.sample_count) {
    throw Error(ErrorCode::kSamplesUnavailable,
                "monte_carlo with " + std::to_string(method.sample_count) +
                    " samples needs cached samples on every model (fewest: " +
                    std::to_string(snapshot.min_cached_samples()) + ")");
  }
  std::vector<double> scores(snapshot.size());
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    scores[i] = score_model(query, snapshot.record(i).statistics, method);
  }
  return scores;
}

std::vector<double> score_batch(const IndexSnapshot& snapshot,
                                std::span<const NormalizedFeature> queries,
                                const ScoreMethod& method) {
  method.validate();
  const std::size_t n_models = snapshot.size();
  const std::size_t n_queries = queries.size();
  const std::size_t dim = snapshot.dim();
  std::vector<double> out(n_queries * n_models);
  if (n_queries == 0) return out;
  for (const auto& q : queries) {
    if (q.dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "query dim " + std::to_string(q.dim()) +
                      " does not match index dim " + std::to_string(dim));
    }
  }
  if (method.kind == MethodKind::kMonteCarlo ||
      method.kind == MethodKind::kFrechet) {
    for (std::size_t q = 0; q < n_queries; ++q) {
      const auto row = score_all(snapshot, queries[q], method);
      std::copy(row.begin(), row.end(), out.begin() + q * n_models);
    }
    return out;
  }

  const auto d = static_cast<Eigen::Index>(dim);
  RowMatrix query_rows(static_cast<Eigen::Index>(n_queries), d);
  for (std::size_t q = 0; q < n_queries; ++q) {
    std::copy(queries[q].values().begin(), queries[q].values().end(),
              query_rows.data() + q * dim);
  }
  Eigen::Map<RowMatrix> scores(out.data(), static_cast<Eigen::Index>(n_queries),
                               static_cast<Eigen::Index>(n_models));

  for (std::size_t m = 0; m < n_models; ++m) {
    const ModelStatistics& stats = snapshot.record(m).statistics;
    const Eigen::Map<const Eigen::VectorXd> mean(stats.mean().data(), d);
    const auto col = static_cast<Eigen::Index>(m);
    switch (method.kind) {
      case MethodKind::kFirstMoment: {
        const double norm = mean.norm();
        if (!(norm > kMinNorm)) {
          throw Error(ErrorCode::kDegenerateMean,
                      "model '" + stats.model_id() + "' has a zero mean");
        }
        scores.col(col) =
            (query_rows * (mean / norm)).array().max(-1.0).min(1.0).matrix();
        break;
      }
      case MethodKind::kFirstSecondMoment: {
        Eigen::MatrixXd covariance = dense_lower(stats.covariance_packed(), dim);
        covariance.triangularView<Eigen::StrictlyUpper>() =
            covariance.transpose().triangularView<Eigen::StrictlyUpper>();
        const RowMatrix projected = query_rows * covariance;
        scores.col(col) =
            projected.cwiseProduct(query_rows).rowwise().sum() /
                (2.0 * method.tau) +
            query_rows * mean;
        break;
      }
      case MethodKind::kGaussianDensity: {
        const auto& cached = stats.cached_cholesky();
        std::optional<CholeskyFactor> fresh;
        if (!cached || cached->epsilon_scale != method.epsilon_scale) {
          fresh = compute_regularized_cholesky(stats, method.epsilon_scale);
        }
        const CholeskyFactor& factor = fresh ? *fresh : *cached;
        const Eigen::MatrixXd lower = dense_lower(factor.lower, dim);
        Eigen::MatrixXd centered = query_rows.transpose();
        centered.colwise() -= mean;
        lower.triangularView<Eigen::Lower>().solveInPlace(centered);
        const double constant =
            static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) +
            factor.logdet;
        scores.col(col) =
            -0.5 * (centered.colwise().squaredNorm().transpose().array() +
                    constant);
        break;
      }
      default:
        break;
    }
  }
  return out;
}

NormalizedFeature model_query_feature(const IndexSnapshot& snapshot,
                                      std::string_view model_id) {
  const ModelRecord& record = snapshot.at(model_id);
  try {
    return normalize(record.statistics.mean());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroVector) throw;
    throw Error(ErrorCode::kDegenerateMean,
                "model '" + record.model_id + "' has a zero mean");
  }
}

std::vector<RankedResult> search(const IndexSnapshot& snapshot,
                                 std::span<const Query> queries,
                                 const ScoreMethod& method, std::size_t k) {
  check_k(k);
  if (queries.empty()) {
    throw Error(ErrorCode::kEmptyQuerySet, "search needs at least one query");
  }
  if (snapshot.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "snapshot is empty");
  }
  for (const Query& q : queries) {
    if (!(q.weight > 0.0) || !std::isfinite(q.weight)) {
      throw Error(ErrorCode::kInvalidArgument, "query weights must be > 0");
    }
  }
  if (method.kind == MethodKind::kFrechet) {
    const auto* id = std::get_if<std::string>(&queries.front().target);
    if (queries.size() != 1 || id == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frechet search takes exactly one model-id query");
    }
    return similar_models(snapshot, *id, k);
  }

  std::vector<WeightedScores> per_query;
  per_query.reserve(queries.size());
  for (const Query& q : queries) {
    std::vector<double> scores;
    if (const auto* id = std::get_if<std::string>(&q.target)) {
      scores = score_all(snapshot, model_query_feature(snapshot, *id), method);
    } else {
      scores = score_all(snapshot, std::get<NormalizedFeature>(q.target), method);
    }
    per_query.push_back({std::move(scores), q.weight});
  }
  if (per_query.size() == 1) {
    return rank_models(snapshot, per_query.front().log_scores, k);
  }
  for (auto& q : per_query) {
    for (double& s : q.log_scores) s = log_likelihood_surrogate(s, method);
  }
  return rank_models(snapshot, poe_combine(per_query), k);
}

std::vector<RankedResult> similar_models(const IndexSnapshot& snapshot,
                                         std::string_view model_id,
                                         std::size_t k) {
  check_k(k);
  const ModelRecord& record = snapshot.at(model_id);
  if (!record.similar) {
    throw Error(ErrorCode::kNotPrecomputed,
                "similar models of '" + record.model_id +
                    "' have not been precomputed");
  }
  std::vector<RankedResult> results;
  const std::size_t keep = std::min(k, record.similar->size());
  results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const SimilarEntry& entry = (*record.similar)[i];
    results.push_back({entry.model_id, -entry.distance, i + 1});
  }
  return results;
}

IndexSnapshot precompute_similarity(const IndexSnapshot& snapshot) {
  const std::size_t n = snapshot.size();
  std::vector<FrechetOperand> operands;
  operands.reserve(n);
  for (const auto& record : snapshot.records()) {
    operands.emplace_back(record.statistics);
  }
  // Upper triangle only; the distance is stored for both directions.
  std::vector<double> distances(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = frechet_distance(operands[i], operands[j]);
      distances[i * n + j] = d;
      distances[j * n + i] = d;
    }
  }
  operands.clear();

  std::vector<ModelRecord> records(snapshot.records().begin(),
                                   snapshot.records().end());
  const std::size_t keep = std::min(snapshot.config().similar_count,
                                    n == 0 ? 0 : n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    auto closer = [&](std::size_t a, std::size_t b) {
      const double da = distances[i * n + a];
      const double db = distances[i * n + b];
      if (da != db) return da < db;
      return records[a].model_id < records[b].model_id;
    };
    std::partial_sort(others.begin(),
                      others.begin() + static_cast<std::ptrdiff_t>(keep),
                      others.end(), closer);
    std::vector<SimilarEntry> similar;
    similar.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
      similar.push_back({records[others[r]].model_id, distances[i * n + others[r]]});
    }
    records[i].similar = std::move(similar);
  }
  return IndexSnapshot::build(std::move(records), snapshot.config(),
                              snapshot.version() + 1);
}

}  // namespace modelsearch
