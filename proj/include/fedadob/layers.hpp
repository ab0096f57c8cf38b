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

#ifndef FEDADOB_LAYERS_HPP
#define FEDADOB_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// ---------------------------------------------------------------------------
// Dense layer: y = W x + b, W is [out x in], b is [out].
// ---------------------------------------------------------------------------

struct DenseLayer {
  Tensor W;  // [out x in]
  Tensor b;  // [out]
  bool use_bias = true;  // obfuscation hosts run bias-free: beta is the shift

  DenseLayer() = default;
  DenseLayer(Tensor weights, Tensor bias, bool use_bias_ = true)
      : W(std::move(weights)), b(std::move(bias)), use_bias(use_bias_) {
    validate();
  }

  std::size_t out_dim() const { return W.extent(0); }
  std::size_t in_dim() const { return W.extent(1); }

  void validate() const {
    if (W.ndim() != 2 || b.ndim() != 1 || W.extent(0) != b.extent(0)) {
      throw DimensionError("dense layer wants W [out x in] and b [out], got W " +
                           shape_str(W.shape()) + ", b " + shape_str(b.shape()));
    }
  }
};

struct DenseGrads {
  Tensor W;
  Tensor b;
  Tensor x;
};

namespace detail {

// Normalizes [in] to [1 x in]; remembers whether to squeeze the result.
inline std::pair<Tensor, bool> as_batch(const Tensor& x, std::size_t want_last) {
  if (x.ndim() == 1) {
    if (x.extent(0) != want_last) {
      throw DimensionError("input dim " + std::to_string(x.extent(0)) +
                           " does not match layer in_dim " + std::to_string(want_last));
    }
    return {x.reshaped({1, x.size()}), true};
  }
  if (x.ndim() != 2 || x.extent(1) != want_last) {
    throw DimensionError("dense input must be [in] or [batch x in], got " +
                         shape_str(x.shape()));
  }
  return {x, false};
}

}  // namespace detail

inline Tensor dense_forward(const DenseLayer& layer, const Tensor& x_raw) {
  layer.validate();
  auto [x, squeeze] = detail::as_batch(x_raw, layer.in_dim());
  const std::size_t batch = x.extent(0), in = layer.in_dim(), out = layer.out_dim();
  Tensor y({batch, out});
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = layer.use_bias ? layer.b[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += layer.W.at(o, i) * x.at(s, i);
      y.at(s, o) = acc;
    }
  }
  ensure_finite(y, "dense_forward");
  return squeeze ? y.reshaped({out}) : y;
}

inline DenseGrads dense_backward(const DenseLayer& layer, const Tensor& x_raw,
                                 const Tensor& grad_y_raw) {
  layer.validate();
  auto [x, squeeze] = detail::as_batch(x_raw, layer.in_dim());
  auto [gy, gy_squeezed] = detail::as_batch(grad_y_raw, layer.out_dim());
  if (x.extent(0) != gy.extent(0)) {
    throw DimensionError("dense_backward batch mismatch: x " + shape_str(x.shape()) +
                         " vs grad_y " + shape_str(gy.shape()));
  }
  const std::size_t batch = x.extent(0), in = layer.in_dim(), out = layer.out_dim();
  DenseGrads g;
  g.W = Tensor({out, in});
  g.b = Tensor({out});
  Tensor gx({batch, in});
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t o = 0; o < out; ++o) {
      const double go = gy.at(s, o);
      g.b[o] += go;
      for (std::size_t i = 0; i < in; ++i) {
        g.W.at(o, i) += go * x.at(s, i);
        gx.at(s, i) += go * layer.W.at(o, i);
      }
    }
  }
  if (!layer.use_bias) g.b = Tensor({out});
  g.x = squeeze ? gx.reshaped({in}) : gx;
  return g;
}

// ---------------------------------------------------------------------------
// Conv2d: W is [out_c x in_c x kH x kW], x is [batch x in_c x H x W].
// Stride/padding only; LeNet-scale coverage.
// ---------------------------------------------------------------------------

struct Conv2dLayer {
  Tensor W;  // [out_c x in_c x kH x kW]
  Tensor b;  // [out_c]
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool use_bias = true;

  Conv2dLayer() = default;
  Conv2dLayer(Tensor weights, Tensor bias, std::size_t stride_ = 1, std::size_t padding_ = 0,
              bool use_bias_ = true)
      : W(std::move(weights)), b(std::move(bias)), stride(stride_), padding(padding_),
        use_bias(use_bias_) {
    validate();
  }

  std::size_t out_channels() const { return W.extent(0); }
  std::size_t in_channels() const { return W.extent(1); }
  std::size_t kh() const { return W.extent(2); }
  std::size_t kw() const { return W.extent(3); }

  void validate() const {
    if (W.ndim() != 4 || b.ndim() != 1 || W.extent(0) != b.extent(0)) {
      throw DimensionError("conv2d wants W [oc x ic x kh x kw] and b [oc], got W " +
                           shape_str(W.shape()) + ", b " + shape_str(b.shape()));
    }
    if (stride == 0) throw ArgumentError("conv2d stride must be >= 1");
  }

  std::pair<std::size_t, std::size_t> out_hw(std::size_t h, std::size_t w) const {
    const std::ptrdiff_t oh = (static_cast<std::ptrdiff_t>(h) + 2 * padding - kh()) / stride + 1;
    const std::ptrdiff_t ow = (static_cast<std::ptrdiff_t>(w) + 2 * padding - kw()) / stride + 1;
    if (oh < 1 || ow < 1) {
      throw DimensionError("conv2d output would be empty for input " +
                           std::to_string(h) + "x" + std::to_string(w));
    }
    return {static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)};
  }
};

struct Conv2dGrads {
  Tensor W;
  Tensor b;
  Tensor x;
};

namespace detail {

inline void check_conv_input(const Conv2dLayer& layer, const Tensor& x) {
  if (x.ndim() != 4 || x.extent(1) != layer.in_channels()) {
    throw DimensionError("conv2d input must be [batch x " +
                         std::to_string(layer.in_channels()) + " x H x W], got " +
                         shape_str(x.shape()));
  }
}

}  // namespace detail

inline Tensor conv2d_forward(const Conv2dLayer& layer, const Tensor& x) {
  layer.validate();
  detail::check_conv_input(layer, x);
  const std::size_t batch = x.extent(0), ic = layer.in_channels();
  const std::size_t h = x.extent(2), w = x.extent(3);
  const auto [oh, ow] = layer.out_hw(h, w);
  const std::size_t oc = layer.out_channels(), kh = layer.kh(), kw = layer.kw();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(layer.padding);

  Tensor y({batch, oc, oh, ow});
  auto xat = [&](std::size_t s, std::size_t c, std::ptrdiff_t i, std::ptrdiff_t j) {
    if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(h) ||
        j >= static_cast<std::ptrdiff_t>(w))
      return 0.0;
    return x[((s * ic + c) * h + i) * w + j];
  };
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t o = 0; o < oc; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = layer.use_bias ? layer.b[o] : 0.0;
          for (std::size_t c = 0; c < ic; ++c)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v)
                acc += layer.W[((o * ic + c) * kh + u) * kw + v] *
                       xat(s, c,
                           static_cast<std::ptrdiff_t>(i * layer.stride + u) - pad,
                           static_cast<std::ptrdiff_t>(j * layer.stride + v) - pad);
          y[((s * oc + o) * oh + i) * ow + j] = acc;
        }
  ensure_finite(y, "conv2d_forward");
  return y;
}

inline Conv2dGrads conv2d_backward(const Conv2dLayer& layer, const Tensor& x,
                                   const Tensor& grad_y) {
  layer.validate();
  detail::check_conv_input(layer, x);
  const std::size_t batch = x.extent(0), ic = layer.in_channels();
  const std::size_t h = x.extent(2), w = x.extent(3);
  const auto [oh, ow] = layer.out_hw(h, w);
  const std::size_t oc = layer.out_channels(), kh = layer.kh(), kw = layer.kw();
  if (grad_y.shape() != Shape{batch, oc, oh, ow}) {
    throw DimensionError("conv2d_backward grad_y shape " + shape_str(grad_y.shape()) +
                         " does not match forward output");
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(layer.padding);

  Conv2dGrads g;
  g.W = Tensor(layer.W.shape());
  g.b = Tensor({oc});
  g.x = Tensor(x.shape());
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t o = 0; o < oc; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const double go = grad_y[((s * oc + o) * oh + i) * ow + j];
          g.b[o] += go;
          for (std::size_t c = 0; c < ic; ++c)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v) {
                const std::ptrdiff_t xi = static_cast<std::ptrdiff_t>(i * layer.stride + u) - pad;
                const std::ptrdiff_t xj = static_cast<std::ptrdiff_t>(j * layer.stride + v) - pad;
                if (xi < 0 || xj < 0 || xi >= static_cast<std::ptrdiff_t>(h) ||
                    xj >= static_cast<std::ptrdiff_t>(w))
                  continue;
                const std::size_t xidx = ((s * ic + c) * h + xi) * w + xj;
                g.W[((o * ic + c) * kh + u) * kw + v] += go * x[xidx];
                g.x[xidx] += go * layer.W[((o * ic + c) * kh + u) * kw + v];
              }
        }
  if (!layer.use_bias) g.b = Tensor({oc});
  return g;
}

// ---------------------------------------------------------------------------
// Activations and losses.
// ---------------------------------------------------------------------------

inline Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);
  return y;
}

inline Tensor relu_backward(const Tensor& x, const Tensor& grad_y) {
  if (!x.same_shape(grad_y)) throw DimensionError("relu_backward shape mismatch");
  Tensor gx = grad_y;
  for (std::size_t i = 0; i < gx.size(); ++i)
    if (x[i] <= 0.0) gx[i] = 0.0;
  return gx;
}

struct LossResult {
  double loss = 0;
  Tensor grad;  // d loss / d first argument
};

// Mean cross-entropy over the batch with softmax applied to logits.
// Accepts [C] with one label or [batch x C] with one label per row.
inline LossResult softmax_xent(const Tensor& logits_raw, const std::vector<int>& labels) {
  const Tensor logits =
      logits_raw.ndim() == 1 ? logits_raw.reshaped({1, logits_raw.size()}) : logits_raw;
  if (logits.ndim() != 2) throw DimensionError("softmax_xent wants [batch x C] logits");
  const std::size_t batch = logits.extent(0), classes = logits.extent(1);
  if (labels.size() != batch) {
    throw DimensionError("softmax_xent got " + std::to_string(labels.size()) +
                         " labels for batch " + std::to_string(batch));
  }
  LossResult out;
  out.grad = Tensor(logits.shape());
  for (std::size_t s = 0; s < batch; ++s) {
    const int label = labels[s];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ArgumentError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(classes) + ")");
    }
    double mx = logits.at(s, 0);
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits.at(s, c));
    double z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(logits.at(s, c) - mx);
    const double logz = std::log(z) + mx;
    out.loss += (logz - logits.at(s, static_cast<std::size_t>(label))) / batch;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(logits.at(s, c) - logz);
      out.grad.at(s, c) = (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / batch;
    }
  }
  ensure_finite(out.loss, "softmax_xent");
  if (logits_raw.ndim() == 1) out.grad = out.grad.reshaped({classes});
  return out;
}

inline LossResult softmax_xent(const Tensor& logits, int label) {
  return softmax_xent(logits, std::vector<int>{label});
}

// Mean of squared elementwise differences.
inline LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw DimensionError("mse_loss shape mismatch: " + shape_str(pred.shape()) +
                         " vs " + shape_str(target.shape()));
  }
  LossResult out;
  out.grad = Tensor(pred.shape());
  const double inv = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += d * d * inv;
    out.grad[i] = 2.0 * d * inv;
  }
  ensure_finite(out.loss, "mse_loss");
  return out;
}

inline std::size_t argmax_row(const Tensor& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < m.extent(1); ++c)
    if (m.at(row, c) > m.at(row, best)) best = c;
  return best;
}

}  // namespace fedadob

#endif  // FEDADOB_LAYERS_HPP
