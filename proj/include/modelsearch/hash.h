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

#ifndef MODELSEARCH_HASH_H_
#define MODELSEARCH_HASH_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace modelsearch {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view data);
// Lowercase hex of sha256(data).
std::string sha256_hex(std::string_view data);

// Standard base64 with padding, no line breaks.
std::string base64_encode(std::string_view data);

}  // namespace modelsearch

#endif  // MODELSEARCH_HASH_H_
