// wsner/rng.hpp
//
// Copyright 2026  The wsner authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WSNER_RNG_HPP_
#define WSNER_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wsner {

// Deterministic RNG used everywhere seeds appear in the public API.
//
// The engine (std::mt19937_64) is fully specified by the standard; the
// distributions below are hand-rolled because the std distribution objects
// are implementation-defined and would break bitwise reproducibility of
// checkpoints across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(Mix(seed)) {}

  uint64_t u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0. Modulo bias is
  // below 2^-50 for every bound used in this codebase.
  uint64_t uniform(uint64_t bound) { return engine_() % bound; }

  // Uniform double in [0, 1) with 53 bits of precision.
  double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * real01(); }

  bool bernoulli(double p) { return real01() < p; }

  // Box-Muller; the second variate is discarded so draw count stays
  // independent of call history.
  double normal(double mean, double stddev) {
    double u1 = real01();
    double u2 = real01();
    while (u1 <= 0.0) u1 = real01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream. Children with distinct ids never collide in
  // practice and do not consume state from the parent, so per-item derived
  // streams make results independent of processing order.
  Rng derive(uint64_t stream) const {
    return Rng(Mix(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  uint64_t seed() const { return seed_; }

 private:
  // splitmix64 finalizer; spreads low-entropy seeds over the full state.
  static uint64_t Mix(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace wsner

#endif  // WSNER_RNG_HPP_
