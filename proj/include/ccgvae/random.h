// Copyright 2026 The CCGVAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCGVAE_RANDOM_H_
#define CCGVAE_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace ccgvae {

// mt19937_64 is fully specified by the standard; the helpers below avoid the
// implementation-defined std:: distributions so streams reproduce across
// standard libraries.
using Rng = std::mt19937_64;

// Uniform integer in [0, n).
inline std::uint64_t uniformIndex(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniformIndex over empty range");
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one draw per call, second value dropped).
inline double standardNormal(Rng& rng) {
  double u1;
  do {
    u1 = uniformUnit(rng);
  } while (u1 <= 0.0);
  const double u2 = uniformUnit(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Index drawn proportionally to non-negative weights; throws if all are 0.
template <typename T>
std::size_t sampleCategorical(Rng& rng, std::span<const T> weights) {
  double total = 0.0;
  for (const T w : weights) total += static_cast<double>(w);
  if (!(total > 0.0)) throw std::invalid_argument("all weights are zero");
  const double target = uniformUnit(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= T{}) continue;
    acc += static_cast<double>(weights[i]);
    last = i;
    if (target < acc) return i;
  }
  return last;
}

}  // namespace ccgvae

#endif  // CCGVAE_RANDOM_H_
