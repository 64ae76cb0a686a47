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

// Row-level numeric kernels shared by the per-model scoring functions and the
// columnar ScoringStore. Storage may be float or double; accumulation is
// always double.

#ifndef MODELSEARCH_KERNELS_H_
#define MODELSEARCH_KERNELS_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "modelsearch/feature_stats.h"

namespace modelsearch::kernels {

template <typename Real>
double dot(const Real* a, const double* b, std::size_t n) {
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < n; ++i) {
    sum += static_cast<double>(a[i]) * b[i];
  }
  return sum;
}

template <typename Real>
double dot(std::span<const Real> a, std::span<const double> b) {
  return dot(a.data(), b.data(), std::min(a.size(), b.size()));
}

// x^T S x for S given as packed row-major lower triangle.
template <typename Real>
double packed_quadratic_form(const Real* packed, const double* x,
                             std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const Real* row = packed + packed_index(i, 0);
    const double off_diagonal = dot(row, x, i);
    total += x[i] * (2.0 * off_diagonal + static_cast<double>(row[i]) * x[i]);
  }
  return total;
}

// Solves L y = rhs by forward substitution (L packed row-major lower) and
// returns ||y||^2. `work` must hold dim values.
template <typename Real>
double forward_solve_squared_norm(const Real* lower, const double* rhs,
                                  double* work, std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const Real* row = lower + packed_index(i, 0);
    const double y = (rhs[i] - dot(row, work, i)) / static_cast<double>(row[i]);
    work[i] = y;
    total += y * y;
  }
  return total;
}

// log( (1/count) sum_r exp(rows[r] . q / tau) ), max-shifted.
template <typename Real>
double log_mean_exp_dot(const Real* rows, std::size_t count, std::size_t dim,
                        const double* q, double tau) {
  std::vector<double> logits(count);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < count; ++r) {
    logits[r] = dot(rows + r * dim, q, dim) / tau;
    peak = std::max(peak, logits[r]);
  }
  double sum = 0.0;
  for (double logit : logits) sum += std::exp(logit - peak);
  return peak + std::log(sum / static_cast<double>(count));
}

}  // namespace modelsearch::kernels

#endif  // MODELSEARCH_KERNELS_H_
