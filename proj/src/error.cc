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

#include "modelsearch/error.h"

namespace modelsearch {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptySampleSet: return "EmptySampleSet";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kSamplesUnavailable: return "SamplesUnavailable";
    case ErrorCode::kDegenerateMean: return "DegenerateMean";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::kComplexResidual: return "ComplexResidual";
    case ErrorCode::kUnknownModelId: return "UnknownModelId";
    case ErrorCode::kNotPrecomputed: return "NotPrecomputed";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kEmptyRelevanceSet: return "EmptyRelevanceSet";
    case ErrorCode::kDuplicateInRanking: return "DuplicateInRanking";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kInvalidAmplitude: return "InvalidAmplitude";
    case ErrorCode::kSeparationInfeasible: return "SeparationInfeasible";
    case ErrorCode::kMethodUnavailable: return "MethodUnavailable";
    case ErrorCode::kProviderTimeout: return "ProviderTimeout";
    case ErrorCode::kProviderDimMismatch: return "ProviderDimMismatch";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kOutOfMemory: return "OutOfMemory";
  }
  return "Unknown";
}

}  // namespace modelsearch
