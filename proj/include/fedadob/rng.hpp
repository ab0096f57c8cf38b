//
// Copyright 2026 The fedadob Authors
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

#ifndef FEDADOB_RNG_HPP
#define FEDADOB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "fedadob/tensor.hpp"

namespace fedadob {

// splitmix64; used to expand seeds and derive independent child streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for sweep point / party `index` under `parent`. Mixing keeps
// neighbouring indices uncorrelated.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  std::uint64_t s = parent + 0x632be59bd9b4e019ULL * (index + 1);
  return splitmix64(s);
}

// Deterministic random stream. Gaussian and uniform variates are produced by
// explicit algorithms (not std::*_distribution) so that a (seed, call
// sequence) pair yields identical values on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix_expand(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in the open-ish interval [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. The second variate of each pair is
  // discarded, keeping the stream position a pure function of call count.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::size_t index(std::size_t n) {
    // Modulo bias is irrelevant at simulation scale (n << 2^64).
    return static_cast<std::size_t>(engine_() % n);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  Tensor normal_tensor(Shape shape, double mean = 0.0, double stddev = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(mean, stddev);
    return t;
  }

  Tensor uniform_tensor(Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(lo, hi);
    return t;
  }

  // Derives an independent stream; advancing the child never moves the parent.
  Rng split() { return Rng(engine_()); }

 private:
  static std::mt19937_64 splitmix_expand(std::uint64_t seed) {
    // Seed the full 19937-bit state from splitmix64 so small/adjacent seeds
    // still give well-separated streams.
    std::uint64_t s = seed;
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s),
                      splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace fedadob

#endif  // FEDADOB_RNG_HPP
