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

#ifndef MODELSEARCH_RANDOM_H_
#define MODELSEARCH_RANDOM_H_

#include <cstdint>
#include <random>

namespace modelsearch {

// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Portable pseudo-random source: the engine is std::mt19937_64 (bit-exact by
// the standard) and the distribution transforms are implemented here rather
// than taken from <random>, whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Generator for sub-stream `stream` of `seed`; streams are independent of
  // each other and of the order in which they are created.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; values are produced in pairs.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace modelsearch

#endif  // MODELSEARCH_RANDOM_H_
