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

#include "fedadob/fedsim.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fedadob/finite_diff.hpp"

using namespace fedadob;
using Catch::Approx;

namespace {

ObfuscationSetup obf_setup(bool enabled, double n_range = 10.0, double sigma2 = 1.0,
                           RefreshPolicy refresh = RefreshPolicy::PerBatch,
                           bool identity = false) {
  ObfuscationSetup s;
  s.enabled = enabled;
  s.identity = identity;
  s.gen.passport_mean_range = n_range;
  s.gen.sigma2 = sigma2;
  s.refresh = refresh;
  return s;
}

struct DeskData {
  Tensor train_x, test_x;
  std::vector<int> train_y, test_y;
  std::size_t classes;
};

DeskData blob_data(std::size_t n_train, std::size_t n_test, std::size_t d,
                   std::size_t classes, std::uint64_t seed, double sep = 8.0) {
  Dataset ds = gen_synthetic(SyntheticKind::GaussianBlobs, n_train + n_test, d, seed,
                             classes, sep);
  tag_splits(ds, n_train, n_test);
  return {ds.gather_features(ds.train_idx), ds.gather_features(ds.test_idx),
          ds.gather_labels(ds.train_idx), ds.gather_labels(ds.test_idx), classes};
}

}  // namespace

TEST_CASE("hfl_aggregate") {
  std::vector<Tensor> a{Tensor::vector({0, 2})};
  std::vector<Tensor> b{Tensor::vector({2, 4})};
  auto mean = hfl_aggregate({a, b});
  CHECK(mean[0].values() == std::vector<double>{1, 3});
  // Identical inputs: unchanged.
  auto same = hfl_aggregate({a, a, a});
  CHECK(same[0].values() == a[0].values());
  // Permutation invariance.
  auto ab = hfl_aggregate({a, b});
  auto ba = hfl_aggregate({b, a});
  CHECK(ab[0].values() == ba[0].values());
  CHECK_THROWS_AS(hfl_aggregate({}), ConfigError);

  // Elementwise mean stays inside the min/max envelope of the uploads.
  Rng rng(3);
  std::vector<std::vector<Tensor>> uploads;
  for (int k = 0; k < 5; ++k) uploads.push_back({rng.normal_tensor({16})});
  auto m = hfl_aggregate(uploads);
  for (std::size_t i = 0; i < 16; ++i) {
    double lo = uploads[0][0][i], hi = uploads[0][0][i];
    for (int k = 1; k < 5; ++k) {
      lo = std::min(lo, uploads[k][0][i]);
      hi = std::max(hi, uploads[k][0][i]);
    }
    CHECK(m[0][i] >= lo - 1e-12);
    CHECK(m[0][i] <= hi + 1e-12);
  }
}

TEST_CASE("hfl_local_epoch: lr 0 freezes parameters but still reports loss") {
  DeskData data = blob_data(64, 16, 6, 2, 1);
  HflClient c = make_hfl_client("c0", data.train_x, data.train_y, 2, 8,
                                obf_setup(true), SgdConfig{0.1}, 7);
  c.sgd.learning_rate = 0.0;
  const auto before_bottom = model_params_copy(c.bottom);
  const auto before_top = model_params_copy(c.top);
  const double loss = hfl_local_epoch(c, 16);
  CHECK(std::isfinite(loss));
  CHECK(loss > 0);
  const auto after_bottom = model_params_copy(c.bottom);
  const auto after_top = model_params_copy(c.top);
  for (std::size_t i = 0; i < before_bottom.size(); ++i)
    CHECK(before_bottom[i].values() == after_bottom[i].values());
  for (std::size_t i = 0; i < before_top.size(); ++i)
    CHECK(before_top[i].values() == after_top[i].values());
}

TEST_CASE("hfl_local_epoch: descent on separable data") {
  Dataset ds = gen_synthetic(SyntheticKind::LinearlySeparable, 80, 4, 21);
  HflClient c = make_hfl_client("c0", ds.features, ds.labels, 2, 8,
                                obf_setup(true, 5.0, 0.5), SgdConfig{0.05}, 3);
  const double first = hfl_local_epoch(c, 16);
  double last = first;
  for (int e = 0; e < 4; ++e) last = hfl_local_epoch(c, 16);
  CHECK(last < first);

  HflClient empty = make_hfl_client("e", Tensor::ones({1, 4}), {}, 2, 4, obf_setup(false),
                                    SgdConfig{0.1}, 1);
  CHECK_THROWS_AS(hfl_local_epoch(empty, 16), ConfigError);
}

TEST_CASE("passthrough client reproduces centralized training step for step") {
  DeskData data = blob_data(60, 20, 5, 3, 31, 6.0);
  const std::uint64_t seed = 11;
  HflClient c = make_hfl_client("c0", data.train_x, data.train_y, 3, 6,
                                obf_setup(true, 10.0, 1.0, RefreshPolicy::PerBatch,
                                          /*identity=*/true),
                                SgdConfig{0.05}, seed);

  // Centralized twin: same initial weights, no passports, same batch order.
  Model central = concat_models(strip_passports(c.bottom), c.top);
  Rng twin_shuffle(derive_seed(seed, 1));
  SgdState twin_state;

  for (int epoch = 0; epoch < 3; ++epoch) {
    const double fed_loss = hfl_local_epoch(c, 16);

    // Replay the same shuffled batches against the centralized model.
    std::vector<std::size_t> order(data.train_y.size());
    std::iota(order.begin(), order.end(), 0);
    twin_shuffle.shuffle(order);
    double central_loss = 0;
    std::size_t batches = 0;
    const std::size_t d = 5;
    for (std::size_t start = 0; start < order.size(); start += 16) {
      const std::size_t count = std::min<std::size_t>(16, order.size() - start);
      Tensor bx({count, d});
      std::vector<int> by(count);
      for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t k = 0; k < d; ++k) bx[r * d + k] = data.train_x[order[start + r] * d + k];
        by[r] = data.train_y[order[start + r]];
      }
      central_loss += train_step(central, bx, by, SgdConfig{0.05}, twin_state);
      ++batches;
    }
    central_loss /= batches;
    REQUIRE(std::abs(fed_loss - central_loss) < 1e-5);
  }
}

TEST_CASE("run_hfl: two IID clients learn a 2-class problem") {
  DeskData data = blob_data(240, 80, 10, 2, 77, 8.0);
  std::vector<HflClient> clients;
  for (int k = 0; k < 2; ++k) {
    // IID halves.
    std::vector<std::size_t> idx;
    for (std::size_t i = k; i < 240; i += 2) idx.push_back(i);
    Tensor fx({idx.size(), 10});
    std::vector<int> fy(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t c = 0; c < 10; ++c) fx[r * 10 + c] = data.train_x[idx[r] * 10 + c];
      fy[r] = data.train_y[idx[r]];
    }
    clients.push_back(make_hfl_client("client" + std::to_string(k), fx, fy, 2, 12,
                                      obf_setup(true, 10.0, 1.0), SgdConfig{0.1},
                                      derive_seed(5, k)));
  }
  HflRunConfig cfg;
  cfg.rounds = 20;
  cfg.batch_size = 24;
  cfg.seed = 5;
  HflRun run = run_hfl(std::move(clients), data.test_x, data.test_y, cfg);

  double mean_acc = 0;
  std::size_t count = 0;
  for (const MetricsRecord& r : run.metrics) {
    if (r.split == "test" && r.round == 20) {
      mean_acc += r.accuracy;
      ++count;
    }
  }
  mean_acc /= count;
  CHECK(mean_acc >= 0.95);

  // Information barrier: uploads and broadcasts never carry bottom params.
  for (const HflClient& c : run.clients) {
    for (const Tensor* p : c.bottom.param_ptrs()) {
      CHECK_FALSE(log_contains_tensor(run.messages, *p));
    }
  }
}

TEST_CASE("run_hfl is deterministic for a fixed seed") {
  DeskData data = blob_data(64, 32, 6, 2, 9);
  auto build = [&]() {
    std::vector<HflClient> cs;
    cs.push_back(make_hfl_client("c0", data.train_x, data.train_y, 2, 8,
                                 obf_setup(true), SgdConfig{0.1}, 42));
    return cs;
  };
  HflRunConfig cfg;
  cfg.rounds = 5;
  cfg.batch_size = 16;
  cfg.seed = 4;
  HflRun a = run_hfl(build(), data.test_x, data.test_y, cfg);
  HflRun b = run_hfl(build(), data.test_x, data.test_y, cfg);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].loss == b.metrics[i].loss);
    CHECK(a.metrics[i].accuracy == b.metrics[i].accuracy);
  }
}

namespace {

struct VflFixture {
  std::vector<VflPassiveParty> passives;
  VflActiveParty active;
};

VflFixture make_vfl(const DeskData& data, std::size_t parties, bool defended,
                    std::uint64_t seed, RefreshPolicy active_refresh = RefreshPolicy::PerBatch,
                    bool identity = false, double sigma2 = 1.0) {
  VflFixture f;
  const std::size_t d = data.train_x.extent(1);
  auto ranges = even_ranges(d, parties);
  auto train_shards = vertical_split(data.train_x, ranges);
  auto test_shards = vertical_split(data.test_x, ranges);
  for (std::size_t k = 0; k < parties; ++k) {
    f.passives.push_back(make_vfl_passive(
        "passive" + std::to_string(k), train_shards[k], test_shards[k], 16, 8,
        obf_setup(defended, 10.0, sigma2, RefreshPolicy::PerBatch, identity), SgdConfig{0.1},
        derive_seed(seed, 10 + k)));
  }
  f.active = make_vfl_active("active", data.train_y, data.test_y, 8, data.classes,
                             obf_setup(defended, 10.0, sigma2, active_refresh, identity),
                             SgdConfig{0.1}, derive_seed(seed, 99));
  return f;
}

}  // namespace

TEST_CASE("vfl_step: lr 0 computes loss without touching state") {
  DeskData data = blob_data(32, 8, 6, 2, 13);
  VflFixture f = make_vfl(data, 2, true, 3);
  for (auto& p : f.passives) p.sgd.learning_rate = 0.0;
  f.active.sgd.learning_rate = 0.0;
  const auto before = model_params_copy(f.passives[0].bottom);
  const auto before_top = model_params_copy(f.active.top);
  Rng defense_rng(1);
  std::vector<std::size_t> batch{0, 1, 2, 3};
  const double loss = vfl_step(f.passives, f.active, batch, 1, DefenseConfig{}, defense_rng,
                               nullptr);
  CHECK(std::isfinite(loss));
  CHECK(loss > 0);
  const auto after = model_params_copy(f.passives[0].bottom);
  const auto after_top = model_params_copy(f.active.top);
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(before[i].values() == after[i].values());
  for (std::size_t i = 0; i < before_top.size(); ++i)
    CHECK(before_top[i].values() == after_top[i].values());
}

TEST_CASE("vfl_step: misaligned batch raises a protocol error") {
  DeskData data = blob_data(16, 4, 4, 2, 17);
  VflFixture f = make_vfl(data, 2, false, 5);
  Rng defense_rng(1);
  std::vector<std::size_t> bad{0, 99};
  CHECK_THROWS_AS(
      vfl_step(f.passives, f.active, bad, 1, DefenseConfig{}, defense_rng, nullptr),
      ProtocolError);
}

TEST_CASE("vfl passthrough (K=1) equals centralized split-model training") {
  DeskData data = blob_data(48, 16, 6, 3, 19, 6.0);
  VflFixture f = make_vfl(data, 1, true, 7, RefreshPolicy::PerBatch, /*identity=*/true);

  Model central = concat_models(strip_passports(f.passives[0].bottom),
                                strip_passports(f.active.top));
  SgdState central_state;
  Rng defense_rng(1);

  for (int step = 0; step < 30; ++step) {
    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < 16; ++i) batch.push_back((step * 16 + i) % 48);
    const double fed_loss =
        vfl_step(f.passives, f.active, batch, step, DefenseConfig{}, defense_rng, nullptr);

    Tensor bx({16, 6});
    std::vector<int> by(16);
    for (std::size_t r = 0; r < 16; ++r) {
      for (std::size_t c = 0; c < 6; ++c) bx[r * 6 + c] = data.train_x[batch[r] * 6 + c];
      by[r] = data.train_y[batch[r]];
    }
    const double central_loss = train_step(central, bx, by, SgdConfig{0.1}, central_state);
    REQUIRE(std::abs(fed_loss - central_loss) < 1e-5);
  }
}

TEST_CASE("the gradient a passive receives matches finite differences") {
  DeskData data = blob_data(32, 8, 6, 2, 23);
  // PerRun refresh keeps passports fixed, so the loss is a deterministic
  // function of the embedding.
  VflFixture f = make_vfl(data, 1, true, 9, RefreshPolicy::PerRun);
  f.passives[0].obf.refresh = RefreshPolicy::PerRun;
  for (auto& p : f.passives) p.sgd.learning_rate = 0.0;
  f.active.sgd.learning_rate = 0.0;

  MessageLog log;
  Rng defense_rng(1);
  std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
  vfl_step(f.passives, f.active, batch, 1, DefenseConfig{}, defense_rng, &log);

  REQUIRE(log.size() == 2);
  const Tensor& h1 = log[0].payload[0];        // Embedding
  const Tensor& grad_h1 = log[1].payload[0];   // EmbeddingGrad

  std::vector<int> by(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) by[r] = data.train_y[batch[r]];
  const Tensor fd = finite_diff_grad(
      [&](const Tensor& h) {
        return softmax_xent(f.active.top.forward(h.reshaped(h1.shape())), by).loss;
      },
      h1.flattened());
  CHECK(max_relative_gap(grad_h1.flattened(), fd, 1e-6) < 1e-4);
}

TEST_CASE("run_vfl: 2-party desk run learns and is deterministic") {
  DeskData data = blob_data(300, 100, 12, 4, 29, 8.0);
  VflRunConfig cfg;
  cfg.rounds = 12;
  cfg.batch_size = 30;
  cfg.seed = 6;
  cfg.keep_message_log = true;

  VflFixture f1 = make_vfl(data, 2, true, 41);
  VflRun run = run_vfl(std::move(f1.passives), std::move(f1.active), cfg);
  double final_acc = 0;
  for (const MetricsRecord& r : run.metrics)
    if (r.split == "test" && r.round == 12) final_acc = r.accuracy;
  CHECK(final_acc >= 0.90);

  // Determinism.
  VflFixture f2 = make_vfl(data, 2, true, 41);
  VflRun again = run_vfl(std::move(f2.passives), std::move(f2.active), cfg);
  REQUIRE(again.metrics.size() == run.metrics.size());
  for (std::size_t i = 0; i < run.metrics.size(); ++i) {
    CHECK(run.metrics[i].loss == again.metrics[i].loss);
    CHECK(run.metrics[i].accuracy == again.metrics[i].accuracy);
  }

  // Information barrier: the log never contains raw features, passports, or
  // bottom parameters.
  for (const auto& p : run.passives) {
    CHECK_FALSE(log_contains_tensor(run.messages, p.train_features));
    for (std::size_t row = 0; row < 4; ++row) {
      Tensor one({1, p.train_features.extent(1)});
      for (std::size_t c = 0; c < p.train_features.extent(1); ++c)
        one[c] = p.train_features.at(row, c);
      CHECK_FALSE(log_contains_tensor(run.messages, one));
    }
    CHECK_FALSE(log_contains_tensor(run.messages, p.inference_passport.s_gamma));
    CHECK_FALSE(log_contains_tensor(run.messages, p.inference_passport.s_beta));
    for (const Tensor* t : p.bottom.param_ptrs())
      CHECK_FALSE(log_contains_tensor(run.messages, *t));
  }

  // Zero rounds: untrained model scores near chance.
  VflFixture f3 = make_vfl(data, 2, true, 41);
  VflRunConfig zero = cfg;
  zero.rounds = 0;
  VflRun untrained = run_vfl(std::move(f3.passives), std::move(f3.active), zero);
  CHECK(untrained.metrics.empty());
  MetricsRecord eval = vfl_evaluate(untrained.passives, untrained.active, 0);
  CHECK(eval.accuracy <= 0.6);  // 4-class chance is 0.25; allow slack
}

TEST_CASE("per-sample active refresh trains and stays finite") {
  DeskData data = blob_data(60, 20, 6, 2, 37);
  VflFixture f = make_vfl(data, 2, true, 43, RefreshPolicy::PerSample, false, 5.0);
  VflRunConfig cfg;
  cfg.rounds = 3;
  cfg.batch_size = 15;
  cfg.seed = 8;
  VflRun run = run_vfl(std::move(f.passives), std::move(f.active), cfg);
  for (const MetricsRecord& r : run.metrics) {
    CHECK(std::isfinite(r.loss));
  }
  MetricsRecord eval = vfl_evaluate(run.passives, run.active, 99);
  CHECK(eval.accuracy > 0.5);
}
