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

#include "fedadob/metrics.hpp"

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "fedadob/rng.hpp"

using namespace fedadob;
using Catch::Approx;

TEST_CASE("mse_recovery") {
  Rng rng(1);
  const Tensor x = rng.normal_tensor({4, 4});
  CHECK(mse_recovery(x, x) == 0.0);
  CHECK(mse_recovery(Tensor::vector({0, 0}), Tensor::vector({1, 1})) == Approx(1.0));
  // Homogeneity: scaling both arguments by c scales the MSE by c^2.
  const Tensor y = rng.normal_tensor({4, 4});
  CHECK(mse_recovery(3.0 * x, 3.0 * y) == Approx(9.0 * mse_recovery(x, y)));
  CHECK_THROWS_AS(mse_recovery(x, Tensor::ones({2, 2})), DimensionError);
}

TEST_CASE("label_recovery_error") {
  CHECK(label_recovery_error({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(label_recovery_error({1, 0}, {1, 1}) == Approx(0.5));
  CHECK(label_recovery_error({0, 0, 0, 1}, {1, 1, 1, 1}) == Approx(0.75));
  CHECK_THROWS_AS(label_recovery_error({}, {}), ArgumentError);
  CHECK_THROWS_AS(label_recovery_error({1}, {1, 2}), ArgumentError);
}

TEST_CASE("label_recovery_error of random guesses approaches (k-1)/k") {
  const std::size_t k = 5, n = 20000;
  Rng rng(7);
  std::vector<int> truth(n), guess(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = static_cast<int>(i % k);
    guess[i] = static_cast<int>(rng.index(k));
  }
  const double err = label_recovery_error(guess, truth);
  const double expect = (k - 1.0) / k;
  const double sigma = std::sqrt(expect * (1 - expect) / n);
  CHECK(std::abs(err - expect) < 3 * sigma);
}

TEST_CASE("cap arithmetic and invariants") {
  CHECK(cap({TradeoffPoint{0, 0.8, 0.5}}) == Approx(0.4));
  CHECK(cap({TradeoffPoint{0, 1.0, 0.0}}) == 0.0);
  CHECK_THROWS_AS(cap({}), ArgumentError);
  CHECK_THROWS_AS(cap({TradeoffPoint{0, 1.5, 0.1}}), ArgumentError);

  // Permutation invariance and the max-recovery-error bound.
  Rng rng(9);
  std::vector<TradeoffPoint> pts;
  double max_err = 0;
  for (int i = 0; i < 6; ++i) {
    pts.push_back({double(i), rng.uniform01(), rng.uniform(0, 2)});
    max_err = std::max(max_err, pts.back().recovery_error);
  }
  const double base = cap(pts);
  std::vector<TradeoffPoint> shuffled = pts;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(cap(shuffled) == Approx(base));
  CHECK(base <= max_err);
}
