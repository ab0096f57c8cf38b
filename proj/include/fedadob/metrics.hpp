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

#ifndef FEDADOB_METRICS_HPP
#define FEDADOB_METRICS_HPP

#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// One point on a privacy-utility trade-off curve: the defense parameter, the
// main-task accuracy it allows, and the recovery error it forces.
struct TradeoffPoint {
  double param_value = 0;
  double main_task_accuracy = 0;  // in [0, 1]
  double recovery_error = 0;      // MSE for feature attacks, error rate for label attacks
};

inline double mse_recovery(const Tensor& x, const Tensor& x_hat) {
  if (!x.same_shape(x_hat)) {
    throw DimensionError("mse_recovery shape mismatch: " + shape_str(x.shape()) +
                         " vs " + shape_str(x_hat.shape()));
  }
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

inline double label_recovery_error(const std::vector<int>& predicted,
                                   const std::vector<int>& truth) {
  if (predicted.empty() || predicted.size() != truth.size()) {
    throw ArgumentError("label_recovery_error wants equal-length non-empty label lists");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

// Calibrated averaged performance: mean over the sweep of accuracy x recovery
// error. Higher is a better privacy-utility trade-off.
inline double cap(const std::vector<TradeoffPoint>& points) {
  if (points.empty()) throw ArgumentError("cap wants at least one trade-off point");
  double acc = 0;
  for (const TradeoffPoint& p : points) {
    if (p.main_task_accuracy < 0 || p.main_task_accuracy > 1) {
      throw ArgumentError("trade-off accuracy outside [0,1]");
    }
    acc += p.main_task_accuracy * p.recovery_error;
  }
  return acc / static_cast<double>(points.size());
}

}  // namespace fedadob

#endif  // FEDADOB_METRICS_HPP
