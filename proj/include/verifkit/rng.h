// Copyright (c) 2026 The verifkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFKIT_RNG_H_
#define VERIFKIT_RNG_H_

#include <cstdint>
#include <random>
#include <span>

namespace verifkit {

// Seeded generator with fully specified output. std::mt19937_64 is pinned by
// the standard; the distributions in <random> are not, so uniform and
// Gaussian draws are implemented here. Gaussians use the Box-Muller
// transform, so results are reproducible per build (bitwise identity across
// libm versions is not promised because of log/cos/sin).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t UniformInt(std::uint64_t n);

  // Standard normal.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Derives an independent seed for sub-stream `stream` (splitmix64 mixing).
  static std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace verifkit

#endif  // VERIFKIT_RNG_H_
