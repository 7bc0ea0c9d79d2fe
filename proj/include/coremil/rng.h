/*
 * Copyright 2026 The coremil Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COREMIL_RNG_H_
#define COREMIL_RNG_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace coremil {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a key path, e.g.
// DeriveSeed(seed, {epoch, sample}). Streams keyed this way do not depend on
// the order in which they are created, so parallel and serial consumers agree.
inline std::uint64_t DeriveSeed(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = MixSeed(seed);
  for (std::uint64_t k : keys) h = MixSeed(h ^ MixSeed(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng MakeRng(std::uint64_t seed,
                   std::initializer_list<std::uint64_t> keys = {}) {
  return Rng(DeriveSeed(seed, keys));
}

// Uniform double in [0, 1) with a fixed bit recipe (std::uniform_real_distribution
// output is implementation-defined).
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on Uniform01, for the same reason.
inline double Gaussian(Rng& rng) {
  const double u1 = 1.0 - Uniform01(rng);  // (0, 1]
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace coremil

#endif  // COREMIL_RNG_H_
