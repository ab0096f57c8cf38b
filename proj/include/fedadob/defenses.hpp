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

#ifndef FEDADOB_DEFENSES_HPP
#define FEDADOB_DEFENSES_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/rng.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// The fixed-obfuscation baselines: Gaussian noise and top-k sparsification,
// applied to whatever leaves a party (gradients or forward embeddings).

enum class DefenseKind { None, DpGaussian, Sparsify };
enum class DefenseTarget { Gradients, Embeddings };

struct DefenseConfig {
  DefenseKind kind = DefenseKind::None;
  double noise_level = 0.0;    // DpGaussian: stddev of the additive noise
  double keep_fraction = 1.0;  // Sparsify: fraction of entries kept
  DefenseTarget applies_to = DefenseTarget::Gradients;

  void validate() const {
    if (noise_level < 0) throw ArgumentError("noise_level must be >= 0");
    if (!(keep_fraction > 0) || keep_fraction > 1) {
      throw ArgumentError("keep_fraction must be in (0, 1]");
    }
  }

  double param_value() const {
    switch (kind) {
      case DefenseKind::DpGaussian: return noise_level;
      case DefenseKind::Sparsify: return keep_fraction;
      case DefenseKind::None: return 0.0;
    }
    return 0.0;
  }
};

inline const char* to_string(DefenseKind k) {
  switch (k) {
    case DefenseKind::None: return "none";
    case DefenseKind::DpGaussian: return "dp_gaussian";
    case DefenseKind::Sparsify: return "sparsify";
  }
  return "?";
}

inline Tensor dp_perturb(const Tensor& t, double noise_level, Rng& rng) {
  if (noise_level < 0) throw ArgumentError("noise_level must be >= 0");
  if (noise_level == 0) return t;
  Tensor out = t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rng.normal(0.0, noise_level);
  return out;
}

// Keeps the ceil(keep_fraction * n) largest-magnitude entries, zeroes the
// rest. Ties broken toward the lower flat index.
inline Tensor sparsify(const Tensor& t, double keep_fraction) {
  if (!(keep_fraction > 0) || keep_fraction > 1) {
    throw ArgumentError("keep_fraction must be in (0, 1]");
  }
  const std::size_t n = t.size();
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(keep_fraction * static_cast<double>(n)));
  if (keep >= n) return t;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(t[a]) > std::abs(t[b]);
  });
  Tensor out(t.shape());
  for (std::size_t r = 0; r < keep; ++r) out[order[r]] = t[order[r]];
  return out;
}

// Applies the configured defense to a tensor leaving a party, if the defense
// targets that boundary.
inline Tensor apply_defense(const DefenseConfig& cfg, DefenseTarget boundary,
                            const Tensor& t, Rng& rng) {
  cfg.validate();
  if (cfg.kind == DefenseKind::None || cfg.applies_to != boundary) return t;
  switch (cfg.kind) {
    case DefenseKind::DpGaussian: return dp_perturb(t, cfg.noise_level, rng);
    case DefenseKind::Sparsify: return sparsify(t, cfg.keep_fraction);
    case DefenseKind::None: break;
  }
  return t;
}

}  // namespace fedadob

#endif  // FEDADOB_DEFENSES_HPP
