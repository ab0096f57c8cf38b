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

#ifndef FEDADOB_FINITE_DIFF_HPP
#define FEDADOB_FINITE_DIFF_HPP

#include <functional>

#include "fedadob/errors.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// Central-difference gradient of a scalar function, one coordinate at a time.
// Deliberately knows nothing about layers: it is the independent oracle the
// analytic backward passes are checked against.
inline Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                               const Tensor& x, double eps = 1e-5) {
  if (!(eps > 0)) throw ArgumentError("finite_diff_grad eps must be > 0");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    ensure_finite(up, "finite_diff_grad f(x+eps)");
    ensure_finite(down, "finite_diff_grad f(x-eps)");
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

// Worst relative disagreement between an analytic gradient and the oracle,
// with an absolute floor so near-zero entries do not blow up the ratio.
inline double max_relative_gap(const Tensor& analytic, const Tensor& reference,
                               double floor = 1e-6) {
  if (!analytic.same_shape(reference)) {
    throw DimensionError("max_relative_gap shape mismatch");
  }
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(reference[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - reference[i]) / denom);
  }
  return worst;
}

}  // namespace fedadob

#endif  // FEDADOB_FINITE_DIFF_HPP
