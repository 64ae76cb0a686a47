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

#ifndef MODELSEARCH_ERROR_H_
#define MODELSEARCH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace modelsearch {

enum class ErrorCode {
  kInvalidArgument,
  kZeroVector,
  kEmptySampleSet,
  kDimensionMismatch,
  kNotPositiveDefinite,
  kSamplesUnavailable,
  kDegenerateMean,
  kLengthMismatch,
  kEmptyQuerySet,
  kComplexResidual,
  kUnknownModelId,
  kNotPrecomputed,
  kCorruptManifest,
  kChecksumMismatch,
  kUnsupportedVersion,
  kEmptyRelevanceSet,
  kDuplicateInRanking,
  kMissingGroundTruth,
  kInvalidAmplitude,
  kSeparationInfeasible,
  kMethodUnavailable,
  kProviderTimeout,
  kProviderDimMismatch,
  kProviderUnavailable,
  kParseError,
  kIoError,
  kOutOfMemory,
};

// Stable identifier used in logs and HTTP error bodies, e.g. "UnknownModelId".
std::string_view error_code_name(ErrorCode code);

// All library failures are reported as Error; `code()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace modelsearch

#endif  // MODELSEARCH_ERROR_H_
