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

#ifndef FEDADOB_OPTIM_HPP
#define FEDADOB_OPTIM_HPP

#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

struct SgdConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double momentum = 0.0;

  void validate() const {
    if (!(learning_rate > 0)) throw ArgumentError("learning_rate must be > 0");
    if (weight_decay < 0) throw ArgumentError("weight_decay must be >= 0");
    if (momentum < 0 || momentum >= 1) throw ArgumentError("momentum must be in [0,1)");
  }
};

// Per-parameter velocity buffers, lazily sized on first step.
class SgdState {
 public:
  Tensor& velocity_for(std::size_t slot, const Tensor& param) {
    if (slot >= velocity_.size()) velocity_.resize(slot + 1);
    if (!velocity_[slot].same_shape(param)) velocity_[slot] = Tensor(param.shape());
    return velocity_[slot];
  }

  void reset() { velocity_.clear(); }

 private:
  std::vector<Tensor> velocity_;
};

// v <- momentum * v + (g + wd * p);  p <- p - lr * v.
inline void sgd_step(Tensor& param, const Tensor& grad, const SgdConfig& cfg,
                     Tensor& velocity) {
  cfg.validate();
  if (!param.same_shape(grad) || !param.same_shape(velocity)) {
    throw DimensionError("sgd_step shape mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + cfg.weight_decay * param[i];
    velocity[i] = cfg.momentum * velocity[i] + g;
    param[i] -= cfg.learning_rate * velocity[i];
  }
}

inline void sgd_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
                     const SgdConfig& cfg, SgdState& state) {
  if (params.size() != grads.size()) {
    throw DimensionError("sgd_step wants one gradient per parameter");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    sgd_step(*params[i], grads[i], cfg, state.velocity_for(i, *params[i]));
  }
}

}  // namespace fedadob

#endif  // FEDADOB_OPTIM_HPP
