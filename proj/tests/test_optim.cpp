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

#include "fedadob/optim.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace fedadob;
using Catch::Approx;

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SgdConfig{0.0}.validate(), ArgumentError);
  CHECK_THROWS_AS((SgdConfig{0.1, -1.0}).validate(), ArgumentError);
  CHECK_THROWS_AS((SgdConfig{0.1, 0.0, 1.0}).validate(), ArgumentError);
  CHECK_NOTHROW((SgdConfig{0.1, 0.0, 0.9}).validate());
}

TEST_CASE("zero gradient and zero decay leave parameters unchanged") {
  Tensor p = Tensor::vector({1, -2, 3});
  Tensor v({3});
  sgd_step(p, Tensor({3}), SgdConfig{0.5}, v);
  CHECK(p[0] == 1);
  CHECK(p[1] == -2);
  CHECK(p[2] == 3);
}

TEST_CASE("plain step arithmetic") {
  Tensor p = Tensor::vector({1});
  Tensor v({1});
  sgd_step(p, Tensor::vector({1}), SgdConfig{0.1}, v);
  CHECK(p[0] == Approx(0.9));
}

TEST_CASE("momentum accelerates repeated identical steps") {
  Tensor plain = Tensor::vector({0});
  Tensor vel_p({1});
  Tensor accel = Tensor::vector({0});
  Tensor vel_a({1});
  const Tensor g = Tensor::vector({1});
  for (int i = 0; i < 2; ++i) {
    sgd_step(plain, g, SgdConfig{0.1}, vel_p);
    sgd_step(accel, g, SgdConfig{0.1, 0.0, 0.5}, vel_a);
  }
  CHECK(std::abs(accel[0]) > std::abs(plain[0]));
}

TEST_CASE("weight decay shrinks parameters even without gradient") {
  Tensor p = Tensor::vector({2});
  Tensor v({1});
  sgd_step(p, Tensor({1}), SgdConfig{0.1, 0.5}, v);
  CHECK(p[0] == Approx(2 - 0.1 * 0.5 * 2));
}

TEST_CASE("multi-parameter step with state") {
  Tensor a = Tensor::vector({1, 1});
  Tensor b = Tensor::vector({2});
  SgdState state;
  std::vector<Tensor> grads{Tensor::vector({1, 0}), Tensor::vector({1})};
  sgd_step({&a, &b}, grads, SgdConfig{0.1}, state);
  CHECK(a[0] == Approx(0.9));
  CHECK(a[1] == Approx(1.0));
  CHECK(b[0] == Approx(1.9));
  CHECK_THROWS_AS(sgd_step({&a}, grads, SgdConfig{0.1}, state), DimensionError);
}
