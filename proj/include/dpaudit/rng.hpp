//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_RNG_HPP_
#define DPAUDIT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "dpaudit/stats.hpp"

namespace dpaudit {

// SplitMix64 finalizer. Used for deriving per-run seeds from
// (master_seed, index) pairs; stable across platforms and schedules.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stable_hash(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Deterministic random source. All samplers are implemented in-repo (inverse
// CDF) so that a given seed produces the same stream on every platform;
// std::*_distribution is implementation-defined and would not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) *
           (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on {0, ..., n - 1}.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double gaussian(double mean = 0.0, double stddev = 1.0) {
    return mean + stddev * norm_quantile(uniform());
  }

  // Laplace(0, scale); scale == 0 degenerates to the constant 0.
  double laplace(double scale) {
    if (scale == 0.0) return 0.0;
    double u = uniform();
    return u < 0.5 ? scale * std::log(2.0 * u)
                   : -scale * std::log(2.0 * (1.0 - u));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_RNG_HPP_
