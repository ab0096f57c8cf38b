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

#include "fedadob/layers.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fedadob/finite_diff.hpp"
#include "fedadob/rng.hpp"

using namespace fedadob;
using Catch::Approx;

TEST_CASE("dense_forward hand cases") {
  // Identity case.
  DenseLayer id{Tensor::matrix({{1, 0}, {0, 1}}), Tensor::vector({0, 0})};
  Tensor y = dense_forward(id, Tensor::vector({3, 4}));
  CHECK(y[0] == 3);
  CHECK(y[1] == 4);

  // Hand matrix multiply: diag(2,3)*[1,1] + [1,1] = [3,4].
  DenseLayer scaled{Tensor::matrix({{2, 0}, {0, 3}}), Tensor::vector({1, 1})};
  y = dense_forward(scaled, Tensor::vector({1, 1}));
  CHECK(y[0] == 3);
  CHECK(y[1] == 4);

  // Zero input hits the bias only.
  DenseLayer sum{Tensor::matrix({{1, 1}}), Tensor::vector({0})};
  y = dense_forward(sum, Tensor::vector({0, 0}));
  CHECK(y[0] == 0);

  CHECK_THROWS_AS(dense_forward(id, Tensor::vector({1, 2, 3})), DimensionError);
}

TEST_CASE("dense_forward is linear when the bias is zero") {
  Rng rng(11);
  DenseLayer layer{rng.normal_tensor({3, 5}), Tensor({3})};
  const Tensor x = rng.normal_tensor({5});
  const Tensor y = rng.normal_tensor({5});
  const double a = 0.7, b = -1.3;
  Tensor combo = a * x + b * y;
  const Tensor lhs = dense_forward(layer, combo);
  const Tensor rhs = a * dense_forward(layer, x) + b * dense_forward(layer, y);
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == Approx(rhs[i]).margin(1e-12));
}

TEST_CASE("dense_backward hand cases") {
  DenseLayer one{Tensor::matrix({{1}}), Tensor::vector({0})};
  DenseGrads g = dense_backward(one, Tensor::vector({2}), Tensor::vector({1}));
  CHECK(g.W[0] == 2);
  CHECK(g.b[0] == 1);
  CHECK(g.x[0] == 1);

  // Zero upstream gradient zeroes everything.
  DenseLayer layer{Tensor::matrix({{1, 2}, {3, 4}}), Tensor::vector({0, 0})};
  g = dense_backward(layer, Tensor::vector({5, 6}), Tensor::vector({0, 0}));
  CHECK(max_abs(g.W) == 0);
  CHECK(max_abs(g.b) == 0);
  CHECK(max_abs(g.x) == 0);
}

namespace {

// Scalar probe: weighted sum of the layer output, so that grad_y == weights.
double dense_probe(const DenseLayer& layer, const Tensor& x, const Tensor& w) {
  return dot(dense_forward(layer, x).flattened(), w);
}

}  // namespace

TEST_CASE("dense_backward matches finite differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    DenseLayer layer{rng.normal_tensor({4, 3}), rng.normal_tensor({4})};
    const Tensor x = rng.normal_tensor({2, 3});
    const Tensor w = rng.normal_tensor({2, 4});
    DenseGrads analytic = dense_backward(layer, x, w);

    const Tensor fd_W = finite_diff_grad(
        [&](const Tensor& W) {
          DenseLayer probe{W, layer.b};
          return dense_probe(probe, x, w.flattened());
        },
        layer.W);
    const Tensor fd_b = finite_diff_grad(
        [&](const Tensor& b) {
          DenseLayer probe{layer.W, b};
          return dense_probe(probe, x, w.flattened());
        },
        layer.b);
    const Tensor fd_x = finite_diff_grad(
        [&](const Tensor& xi) { return dense_probe(layer, xi.reshaped(x.shape()), w.flattened()); },
        x.flattened());

    CHECK(max_relative_gap(analytic.W, fd_W) < 1e-4);
    CHECK(max_relative_gap(analytic.b, fd_b) < 1e-4);
    CHECK(max_relative_gap(analytic.x.flattened(), fd_x) < 1e-4);
  }
}

TEST_CASE("conv2d hand cases") {
  // 1x1 identity kernel passes the input through.
  Tensor w({2, 2, 1, 1});
  w[0 * 2 + 0] = 1.0;  // out 0 <- in 0
  w[1 * 2 + 1] = 1.0;  // out 1 <- in 1
  Conv2dLayer id{w, Tensor({2})};
  Rng rng(3);
  const Tensor x = rng.normal_tensor({1, 2, 3, 3});
  const Tensor y = conv2d_forward(id, x);
  REQUIRE(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == Approx(x[i]));

  // 3x3 all-ones kernel on all-ones 3x3 input, no padding -> 9.
  Conv2dLayer ones{Tensor::ones({1, 1, 3, 3}), Tensor({1})};
  const Tensor out = conv2d_forward(ones, Tensor::ones({1, 1, 3, 3}));
  REQUIRE(out.shape() == Shape{1, 1, 1, 1});
  CHECK(out[0] == 9.0);
}

TEST_CASE("conv2d stride and padding shapes") {
  Conv2dLayer conv{Tensor::ones({1, 1, 3, 3}), Tensor({1}), 2, 1};
  const Tensor y = conv2d_forward(conv, Tensor::ones({1, 1, 5, 5}));
  CHECK(y.shape() == Shape{1, 1, 3, 3});
  // Kernel larger than padded input is an error.
  Conv2dLayer big{Tensor::ones({1, 1, 7, 7}), Tensor({1})};
  CHECK_THROWS_AS(conv2d_forward(big, Tensor::ones({1, 1, 3, 3})), DimensionError);
}

TEST_CASE("conv2d_backward matches finite differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    Conv2dLayer layer{rng.normal_tensor({2, 2, 3, 3}), rng.normal_tensor({2}),
                      (seed % 2) + 1, seed % 2};
    const Tensor x = rng.normal_tensor({2, 2, 4, 4});
    const Tensor y = conv2d_forward(layer, x);
    const Tensor w = rng.normal_tensor(y.shape());
    Conv2dGrads analytic = conv2d_backward(layer, x, w);

    auto probe = [&](const Conv2dLayer& l, const Tensor& xi) {
      return dot(conv2d_forward(l, xi).flattened(), w.flattened());
    };
    const Tensor fd_W = finite_diff_grad(
        [&](const Tensor& W) {
          return probe(Conv2dLayer{W, layer.b, layer.stride, layer.padding}, x);
        },
        layer.W);
    const Tensor fd_b = finite_diff_grad(
        [&](const Tensor& b) {
          return probe(Conv2dLayer{layer.W, b, layer.stride, layer.padding}, x);
        },
        layer.b);
    const Tensor fd_x = finite_diff_grad(
        [&](const Tensor& xi) { return probe(layer, xi.reshaped(x.shape())); }, x.flattened());

    CHECK(max_relative_gap(analytic.W, fd_W) < 1e-4);
    CHECK(max_relative_gap(analytic.b, fd_b) < 1e-4);
    CHECK(max_relative_gap(analytic.x.flattened(), fd_x) < 1e-4);
  }
}

TEST_CASE("softmax cross-entropy") {
  // Uniform logits: loss is ln(C) regardless of the label.
  for (int label = 0; label < 4; ++label) {
    LossResult r = softmax_xent(Tensor::vector({0.5, 0.5, 0.5, 0.5}), label);
    CHECK(r.loss == Approx(std::log(4.0)));
  }
  CHECK_THROWS_AS(softmax_xent(Tensor::vector({1, 2}), 2), ArgumentError);
  CHECK_THROWS_AS(softmax_xent(Tensor::vector({1, 2}), -1), ArgumentError);

  // Gradient vs finite differences, tight tolerance.
  Rng rng(5);
  const Tensor logits = rng.normal_tensor({3, 5});
  const std::vector<int> labels{0, 3, 2};
  LossResult r = softmax_xent(logits, labels);
  const Tensor fd = finite_diff_grad(
      [&](const Tensor& l) { return softmax_xent(l.reshaped(logits.shape()), labels).loss; },
      logits.flattened(), 1e-6);
  CHECK(max_relative_gap(r.grad.flattened(), fd, 1e-4) < 1e-5);
}

TEST_CASE("mse loss") {
  Rng rng(6);
  const Tensor x = rng.normal_tensor({7});
  CHECK(mse_loss(x, x).loss == 0.0);

  LossResult r = mse_loss(Tensor::vector({1, 3}), Tensor::vector({0, 0}));
  CHECK(r.loss == Approx(5.0));
  CHECK(r.grad[0] == Approx(1.0));
  CHECK(r.grad[1] == Approx(3.0));

  const Tensor target = rng.normal_tensor({7});
  const Tensor fd = finite_diff_grad(
      [&](const Tensor& p) { return mse_loss(p, target).loss; }, x, 1e-6);
  CHECK(max_relative_gap(mse_loss(x, target).grad, fd) < 1e-5);
}

TEST_CASE("relu and its backward") {
  const Tensor x = Tensor::vector({-1, 0, 2});
  const Tensor y = relu(x);
  CHECK(y[0] == 0);
  CHECK(y[1] == 0);
  CHECK(y[2] == 2);
  const Tensor g = relu_backward(x, Tensor::vector({5, 5, 5}));
  CHECK(g[0] == 0);
  CHECK(g[1] == 0);
  CHECK(g[2] == 5);
}

TEST_CASE("finite_diff_grad sanity") {
  // f(x) = sum x^2 has gradient 2x.
  const Tensor g = finite_diff_grad(
      [](const Tensor& x) { return dot(x, x); }, Tensor::vector({1, 2}), 1e-6);
  CHECK(g[0] == Approx(2.0).margin(1e-6));
  CHECK(g[1] == Approx(4.0).margin(1e-6));

  // Constant function: zero gradient.
  const Tensor z = finite_diff_grad([](const Tensor&) { return 3.0; }, Tensor::vector({1, 2, 3}));
  CHECK(max_abs(z) == 0.0);

  // f(x) = x0*x1 at (3,5) -> (5,3).
  const Tensor p = finite_diff_grad(
      [](const Tensor& x) { return x[0] * x[1]; }, Tensor::vector({3, 5}), 1e-6);
  CHECK(p[0] == Approx(5.0).margin(1e-6));
  CHECK(p[1] == Approx(3.0).margin(1e-6));

  CHECK_THROWS_AS(finite_diff_grad([](const Tensor&) { return 1.0; }, Tensor::vector({1}), 0.0),
                  ArgumentError);
  CHECK_THROWS_AS(
      finite_diff_grad([](const Tensor&) { return std::nan(""); }, Tensor::vector({1}), 1e-6),
      NumericError);
}
