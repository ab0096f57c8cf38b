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

#ifndef FEDADOB_FEDSIM_HPP
#define FEDADOB_FEDSIM_HPP

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fedadob/dataset.hpp"
#include "fedadob/defenses.hpp"
#include "fedadob/model.hpp"
#include "fedadob/passport.hpp"

// Horizontal and vertical federation as in-process state machines. Every
// quantity that crosses a party boundary travels as a FedMessage, so a run's
// log is a complete record of what was disclosed.

namespace fedadob {

enum class MessageKind { WeightsUpload, WeightsBroadcast, Embedding, EmbeddingGrad };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::WeightsUpload: return "weights_upload";
    case MessageKind::WeightsBroadcast: return "weights_broadcast";
    case MessageKind::Embedding: return "embedding";
    case MessageKind::EmbeddingGrad: return "embedding_grad";
  }
  return "?";
}

struct FedMessage {
  MessageKind kind;
  int round = 0;
  std::string sender;
  std::string receiver;
  std::vector<Tensor> payload;
};

using MessageLog = std::vector<FedMessage>;

// True when any logged payload reproduces `secret` exactly; the audit tests
// scan a run's log for private tensors.
inline bool log_contains_tensor(const MessageLog& log, const Tensor& secret) {
  for (const FedMessage& msg : log) {
    for (const Tensor& t : msg.payload) {
      if (t.size() == secret.size() && t.values() == secret.values()) return true;
    }
  }
  return false;
}

struct MetricsRecord {
  int round = 0;
  std::string party;
  std::string split;  // "train" or "test"
  double loss = 0;
  double accuracy = 0;
};

// Passport behaviour of one party's model shard.
struct ObfuscationSetup {
  bool enabled = true;
  bool identity = false;  // diagnostic passthrough (gamma=1, beta=0)
  PassportGenParams gen;
  RefreshPolicy refresh = RefreshPolicy::PerBatch;
  // Columns of the dense-host passport matrix. The pooled scale/bias average
  // over this axis, so more columns mean less refresh jitter (the dense
  // analogue of a conv passport's spatial extent).
  std::size_t passport_cols = 16;
};

namespace detail {

inline std::vector<std::size_t> epoch_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

inline void add_scaled(std::vector<Tensor>& acc, const std::vector<Tensor>& grads, double scale) {
  if (acc.empty()) {
    acc = grads;
    for (Tensor& t : acc) t *= scale;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    Tensor scaled = grads[i];
    scaled *= scale;
    acc[i] += scaled;
  }
}

// lr = 0 means "evaluate only": losses are computed but no state moves.
inline void maybe_sgd_step(Model& model, const std::vector<Tensor>& grads,
                           const SgdConfig& cfg, SgdState& state) {
  if (cfg.learning_rate == 0.0) return;
  sgd_step(model.param_ptrs(), grads, cfg, state);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Horizontal federation.
// ---------------------------------------------------------------------------

struct HflClient {
  std::string name;
  Model bottom;  // private theta_k; holds the passport layer
  Model top;     // shared omega_k
  Tensor features;
  std::vector<int> labels;
  ObfuscationSetup obf;
  PassportSampler sampler{PassportGenParams{}, 0};
  Passport inference_passport;
  SgdConfig sgd;
  SgdState bottom_state, top_state;
  Rng shuffle_rng{0};
};

// Builds a desk-scale client: passported first dense layer as the private
// bottom, dense stack as the shared top.
inline HflClient make_hfl_client(std::string name, Tensor features, std::vector<int> labels,
                                 std::size_t classes, std::size_t hidden,
                                 const ObfuscationSetup& obf, const SgdConfig& sgd,
                                 std::uint64_t seed) {
  HflClient c;
  c.name = std::move(name);
  c.features = std::move(features);
  c.labels = std::move(labels);
  c.obf = obf;
  c.sgd = sgd;
  c.shuffle_rng = Rng(derive_seed(seed, 1));
  Rng init(derive_seed(seed, 2));

  const std::size_t in_dim = c.features.size() / c.features.extent(0);
  const double scale1 = std::sqrt(2.0 / static_cast<double>(in_dim));
  const double scale2 = std::sqrt(2.0 / static_cast<double>(hidden));
  DenseLayer first{init.normal_tensor({hidden, in_dim}, 0, scale1), Tensor({hidden})};

  if (obf.enabled) {
    ObfuscationSetup setup = obf;
    setup.gen.channels = in_dim;
    setup.gen.per_channel_shape = {};
    first.use_bias = false;
    PassportLayerParams params = make_passport_layer(first, setup.gen, init);
    params.identity_obfuscation = setup.identity;
    c.sampler = PassportSampler(setup.gen, derive_seed(seed, 3));
    c.obf = setup;
    c.inference_passport = c.sampler.sample();
    c.bottom.layers.emplace_back(PassportLayer{params, c.inference_passport});
  } else {
    c.bottom.layers.emplace_back(first);
  }
  c.top.layers.emplace_back(ReluLayer{});
  c.top.layers.emplace_back(DenseLayer{init.normal_tensor({classes, hidden}, 0, scale2),
                                       Tensor({classes})});
  return c;
}

inline std::vector<Tensor> model_params_copy(const Model& m) {
  std::vector<Tensor> out;
  for (const Tensor* t : m.param_ptrs()) out.push_back(*t);
  return out;
}

inline void assign_model_params(Model& m, const std::vector<Tensor>& params) {
  auto ptrs = m.param_ptrs();
  if (ptrs.size() != params.size()) throw DimensionError("parameter list mismatch");
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    if (!ptrs[i]->same_shape(params[i])) throw DimensionError("parameter shape mismatch");
    *ptrs[i] = params[i];
  }
}

// Elementwise mean of per-client parameter lists.
inline std::vector<Tensor> hfl_aggregate(const std::vector<std::vector<Tensor>>& uploads) {
  if (uploads.empty()) throw ConfigError("hfl_aggregate wants at least one upload");
  std::vector<Tensor> mean = uploads[0];
  for (std::size_t k = 1; k < uploads.size(); ++k) {
    if (uploads[k].size() != mean.size()) throw DimensionError("upload arity mismatch");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += uploads[k][i];
  }
  for (Tensor& t : mean) t *= 1.0 / static_cast<double>(uploads.size());
  return mean;
}

// One local pass over the client's data: per batch, sample the passport per
// the refresh policy, train bottom and top jointly. Returns the mean loss.
inline double hfl_local_epoch(HflClient& c, std::size_t batch_size) {
  if (c.labels.empty()) throw ConfigError("client " + c.name + " has no data");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  const std::vector<std::size_t> order = detail::epoch_order(c.labels.size(), c.shuffle_rng);

  const std::size_t d = c.features.size() / c.features.extent(0);
  Shape batch_shape = c.features.shape();
  double loss_sum = 0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, order.size() - start);
    batch_shape[0] = count;
    Tensor bx(batch_shape);
    std::vector<int> by(count);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t src = order[start + r];
      for (std::size_t k = 0; k < d; ++k) bx[r * d + k] = c.features[src * d + k];
      by[r] = c.labels[src];
    }

    const std::size_t micro = c.obf.enabled && c.obf.refresh == RefreshPolicy::PerSample ? 1 : count;
    if (c.obf.enabled && c.obf.refresh == RefreshPolicy::PerBatch) {
      c.bottom.set_passport(c.sampler.sample());
    }

    std::vector<Tensor> bottom_grads, top_grads;
    double batch_loss = 0;
    Shape micro_shape = batch_shape;
    for (std::size_t ms = 0; ms < count; ms += micro) {
      const std::size_t mcount = std::min(micro, count - ms);
      if (c.obf.enabled && c.obf.refresh == RefreshPolicy::PerSample) {
        c.bottom.set_passport(c.sampler.sample());
      }
      micro_shape[0] = mcount;
      Tensor mx(micro_shape);
      std::vector<int> my(mcount);
      for (std::size_t r = 0; r < mcount; ++r) {
        for (std::size_t k = 0; k < d; ++k) mx[r * d + k] = bx[(ms + r) * d + k];
        my[r] = by[ms + r];
      }
      const double w = static_cast<double>(mcount) / static_cast<double>(count);
      ModelCache bcache, tcache;
      const Tensor h = c.bottom.forward(mx, &bcache);
      const Tensor logits = c.top.forward(h, &tcache);
      LossResult loss = softmax_xent(logits, my);
      batch_loss += loss.loss * w;

      std::vector<Tensor> tg, bg;
      const Tensor grad_h = c.top.backward(tcache, loss.grad, tg);
      c.bottom.backward(bcache, grad_h, bg);
      detail::add_scaled(top_grads, tg, w);
      detail::add_scaled(bottom_grads, bg, w);
    }
    detail::maybe_sgd_step(c.bottom, bottom_grads, c.sgd, c.bottom_state);
    detail::maybe_sgd_step(c.top, top_grads, c.sgd, c.top_state);
    loss_sum += batch_loss;
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

// Evaluates a client's composite model on (features, labels) with its
// persisted inference passport.
inline MetricsRecord hfl_evaluate(HflClient& c, const Tensor& features,
                                  const std::vector<int>& labels, int round,
                                  const std::string& split) {
  if (c.obf.enabled) c.bottom.set_passport(c.inference_passport);
  const Tensor h = c.bottom.forward(features);
  const Tensor logits = c.top.forward(h);
  MetricsRecord rec;
  rec.round = round;
  rec.party = c.name;
  rec.split = split;
  rec.loss = softmax_xent(logits, labels).loss;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (argmax_row(logits, i) == static_cast<std::size_t>(labels[i])) ++hits;
  rec.accuracy = static_cast<double>(hits) / static_cast<double>(labels.size());
  return rec;
}

struct HflRunConfig {
  std::size_t rounds = 10;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 32;
  DefenseConfig defense;  // applied to the uploaded weight delta
  std::uint64_t seed = 0;
};

struct HflRun {
  std::vector<HflClient> clients;
  std::vector<MetricsRecord> metrics;
  MessageLog messages;
};

// FedAvg over the shared top. The private bottoms never enter a message; the
// optional defense perturbs the uploaded weight delta (the round's
// accumulated gradient).
inline HflRun run_hfl(std::vector<HflClient> clients, const Tensor& test_features,
                      const std::vector<int>& test_labels, const HflRunConfig& cfg) {
  if (clients.empty()) throw ConfigError("run_hfl wants >= 1 client");
  HflRun run;
  run.clients = std::move(clients);
  Rng defense_rng(derive_seed(cfg.seed, 0xdef));

  std::vector<Tensor> global = model_params_copy(run.clients[0].top);
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    std::vector<std::vector<Tensor>> uploads;
    for (HflClient& c : run.clients) {
      assign_model_params(c.top, global);
      run.messages.push_back({MessageKind::WeightsBroadcast, int(round), "server", c.name, global});
      double loss = 0;
      for (std::size_t e = 0; e < cfg.local_epochs; ++e) loss = hfl_local_epoch(c, cfg.batch_size);
      run.metrics.push_back({int(round), c.name, "train", loss, 0.0});

      std::vector<Tensor> upload = model_params_copy(c.top);
      if (cfg.defense.kind != DefenseKind::None) {
        for (std::size_t i = 0; i < upload.size(); ++i) {
          const Tensor delta = upload[i] - global[i];
          upload[i] = global[i] + apply_defense(cfg.defense, DefenseTarget::Gradients, delta,
                                                defense_rng);
        }
      }
      run.messages.push_back({MessageKind::WeightsUpload, int(round), c.name, "server", upload});
      uploads.push_back(std::move(upload));
    }
    global = hfl_aggregate(uploads);
    for (HflClient& c : run.clients) {
      assign_model_params(c.top, global);
      run.metrics.push_back(hfl_evaluate(c, test_features, test_labels, int(round), "test"));
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Vertical federation.
// ---------------------------------------------------------------------------

struct VflPassiveParty {
  std::string name;
  Model bottom;  // G_theta_k, passported; emits embeddings only
  Tensor train_features;
  Tensor test_features;
  ObfuscationSetup obf;
  PassportSampler sampler{PassportGenParams{}, 0};
  Passport inference_passport;
  SgdConfig sgd;
  SgdState state;
};

struct VflActiveParty {
  std::string name;
  Model top;  // F_omega with its own passport layer; emits per-party gradients only
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  ObfuscationSetup obf;
  PassportSampler sampler{PassportGenParams{}, 0};
  Passport inference_passport;
  SgdConfig sgd;
  SgdState state;
};

// Bottom: Dense(d_k -> hidden) + ReLU + passported Dense(hidden -> embed).
inline VflPassiveParty make_vfl_passive(std::string name, Tensor train_features,
                                        Tensor test_features, std::size_t hidden,
                                        std::size_t embed, const ObfuscationSetup& obf,
                                        const SgdConfig& sgd, std::uint64_t seed) {
  VflPassiveParty p;
  p.name = std::move(name);
  p.train_features = std::move(train_features);
  p.test_features = std::move(test_features);
  p.obf = obf;
  p.sgd = sgd;
  Rng init(derive_seed(seed, 2));

  const std::size_t in_dim = p.train_features.size() / p.train_features.extent(0);
  const double s1 = std::sqrt(2.0 / static_cast<double>(in_dim));
  const double s2 = std::sqrt(2.0 / static_cast<double>(hidden));
  p.bottom.layers.emplace_back(
      DenseLayer{init.normal_tensor({hidden, in_dim}, 0, s1), Tensor({hidden})});
  p.bottom.layers.emplace_back(ReluLayer{});
  DenseLayer embed_layer{init.normal_tensor({embed, hidden}, 0, s2), Tensor({embed})};

  if (obf.enabled) {
    ObfuscationSetup setup = obf;
    setup.gen.channels = hidden;
    setup.gen.per_channel_shape = {};
    embed_layer.use_bias = false;
    PassportLayerParams params = make_passport_layer(embed_layer, setup.gen, init);
    params.identity_obfuscation = setup.identity;
    p.obf = setup;
    p.sampler = PassportSampler(setup.gen, derive_seed(seed, 3));
    p.inference_passport = p.sampler.sample();
    p.bottom.layers.emplace_back(PassportLayer{params, p.inference_passport});
  } else {
    p.bottom.layers.emplace_back(embed_layer);
  }
  return p;
}

// Top: passported Dense(embed -> classes) on the summed embeddings.
inline VflActiveParty make_vfl_active(std::string name, std::vector<int> train_labels,
                                      std::vector<int> test_labels, std::size_t embed,
                                      std::size_t classes, const ObfuscationSetup& obf,
                                      const SgdConfig& sgd, std::uint64_t seed) {
  VflActiveParty a;
  a.name = std::move(name);
  a.train_labels = std::move(train_labels);
  a.test_labels = std::move(test_labels);
  a.obf = obf;
  a.sgd = sgd;
  Rng init(derive_seed(seed, 2));
  const double s = std::sqrt(2.0 / static_cast<double>(embed));
  DenseLayer head{init.normal_tensor({classes, embed}, 0, s), Tensor({classes})};

  if (obf.enabled) {
    ObfuscationSetup setup = obf;
    setup.gen.channels = embed;
    setup.gen.per_channel_shape = {};
    head.use_bias = false;
    PassportLayerParams params = make_passport_layer(head, setup.gen, init);
    params.identity_obfuscation = setup.identity;
    a.obf = setup;
    a.sampler = PassportSampler(setup.gen, derive_seed(seed, 3));
    a.inference_passport = a.sampler.sample();
    a.top.layers.emplace_back(PassportLayer{params, a.inference_passport});
  } else {
    a.top.layers.emplace_back(head);
  }
  return a;
}

namespace detail {

inline Tensor gather_rows(const Tensor& all, const std::vector<std::size_t>& idx) {
  const std::size_t d = all.size() / all.extent(0);
  Shape shape = all.shape();
  shape[0] = idx.size();
  Tensor out(shape);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= all.extent(0)) throw ProtocolError("batch index outside party data");
    for (std::size_t k = 0; k < d; ++k) out[r * d + k] = all[idx[r] * d + k];
  }
  return out;
}

}  // namespace detail

// One synchronized batch step of the vertical protocol: passives send
// obfuscated embeddings, the active party returns per-party embedding
// gradients, everyone updates its own shard. Returns the batch loss.
inline double vfl_step(std::vector<VflPassiveParty>& passives, VflActiveParty& active,
                       const std::vector<std::size_t>& batch_idx, int round,
                       const DefenseConfig& defense, Rng& defense_rng, MessageLog* log) {
  if (passives.empty()) throw ConfigError("vfl_step wants >= 1 passive party");
  if (batch_idx.empty()) throw ProtocolError("empty batch");
  for (const VflPassiveParty& p : passives) {
    for (std::size_t i : batch_idx) {
      if (i >= p.train_features.extent(0)) {
        throw ProtocolError("party " + p.name + " cannot align batch sample " +
                            std::to_string(i));
      }
    }
  }
  std::vector<int> by(batch_idx.size());
  for (std::size_t r = 0; r < batch_idx.size(); ++r) {
    if (batch_idx[r] >= active.train_labels.size()) {
      throw ProtocolError("active party cannot align batch sample " +
                          std::to_string(batch_idx[r]));
    }
    by[r] = active.train_labels[batch_idx[r]];
  }

  // Batch-level refreshes happen once; per-sample parties force micro-steps.
  bool any_per_sample = active.obf.enabled && active.obf.refresh == RefreshPolicy::PerSample;
  for (VflPassiveParty& p : passives) {
    any_per_sample |= p.obf.enabled && p.obf.refresh == RefreshPolicy::PerSample;
    if (p.obf.enabled && p.obf.refresh == RefreshPolicy::PerBatch) {
      p.bottom.set_passport(p.sampler.sample());
    }
  }
  if (active.obf.enabled && active.obf.refresh == RefreshPolicy::PerBatch) {
    active.top.set_passport(active.sampler.sample());
  }

  const std::size_t count = batch_idx.size();
  const std::size_t micro = any_per_sample ? 1 : count;

  std::vector<std::vector<Tensor>> passive_grads(passives.size());
  std::vector<Tensor> active_grads;
  std::vector<Tensor> h_messages(passives.size());      // accumulated per batch for the log
  std::vector<Tensor> grad_messages(passives.size());
  double loss_total = 0;

  for (std::size_t ms = 0; ms < count; ms += micro) {
    const std::size_t mcount = std::min(micro, count - ms);
    const double w = static_cast<double>(mcount) / static_cast<double>(count);
    const std::vector<std::size_t> micro_idx(batch_idx.begin() + ms,
                                             batch_idx.begin() + ms + mcount);
    const std::vector<int> my(by.begin() + ms, by.begin() + ms + mcount);

    for (VflPassiveParty& p : passives) {
      if (p.obf.enabled && p.obf.refresh == RefreshPolicy::PerSample) {
        p.bottom.set_passport(p.sampler.sample());
      }
    }
    if (active.obf.enabled && active.obf.refresh == RefreshPolicy::PerSample) {
      active.top.set_passport(active.sampler.sample());
    }

    // Passive forward: H_k, possibly defended at the embedding boundary.
    std::vector<ModelCache> caches(passives.size());
    Tensor h_sum;
    for (std::size_t k = 0; k < passives.size(); ++k) {
      const Tensor mx = detail::gather_rows(passives[k].train_features, micro_idx);
      Tensor h = passives[k].bottom.forward(mx, &caches[k]);
      h = apply_defense(defense, DefenseTarget::Embeddings, h, defense_rng);
      if (log) {
        if (h_messages[k].size() == 0) {
          h_messages[k] = h;
        } else {
          // Concatenate micro-batch rows for the audit log.
          Tensor merged({h_messages[k].extent(0) + h.extent(0), h.extent(1)});
          std::copy(h_messages[k].values().begin(), h_messages[k].values().end(),
                    merged.values().begin());
          std::copy(h.values().begin(), h.values().end(),
                    merged.values().begin() + h_messages[k].size());
          h_messages[k] = std::move(merged);
        }
      }
      if (k == 0) {
        h_sum = h;
      } else {
        if (!h_sum.same_shape(h)) throw ProtocolError("embedding shape mismatch across parties");
        h_sum += h;
      }
    }

    // Active: loss and gradients.
    ModelCache tcache;
    const Tensor logits = active.top.forward(h_sum, &tcache);
    LossResult loss = softmax_xent(logits, my);
    loss_total += loss.loss * w;

    std::vector<Tensor> tg;
    Tensor grad_h = active.top.backward(tcache, loss.grad, tg);
    detail::add_scaled(active_grads, tg, w);

    grad_h = apply_defense(defense, DefenseTarget::Gradients, grad_h, defense_rng);
    for (std::size_t k = 0; k < passives.size(); ++k) {
      std::vector<Tensor> bg;
      passives[k].bottom.backward(caches[k], grad_h, bg);
      detail::add_scaled(passive_grads[k], bg, w);
      if (log) {
        if (grad_messages[k].size() == 0) {
          grad_messages[k] = grad_h;
        } else {
          Tensor merged({grad_messages[k].extent(0) + grad_h.extent(0), grad_h.extent(1)});
          std::copy(grad_messages[k].values().begin(), grad_messages[k].values().end(),
                    merged.values().begin());
          std::copy(grad_h.values().begin(), grad_h.values().end(),
                    merged.values().begin() + grad_messages[k].size());
          grad_messages[k] = std::move(merged);
        }
      }
    }
  }

  detail::maybe_sgd_step(active.top, active_grads, active.sgd, active.state);
  for (std::size_t k = 0; k < passives.size(); ++k) {
    detail::maybe_sgd_step(passives[k].bottom, passive_grads[k], passives[k].sgd,
                           passives[k].state);
  }
  if (log) {
    for (std::size_t k = 0; k < passives.size(); ++k) {
      log->push_back({MessageKind::Embedding, round, passives[k].name, active.name,
                      {std::move(h_messages[k])}});
      log->push_back({MessageKind::EmbeddingGrad, round, active.name, passives[k].name,
                      {std::move(grad_messages[k])}});
    }
  }
  return loss_total;
}

// Test-set evaluation with every party's persisted inference passport.
inline MetricsRecord vfl_evaluate(std::vector<VflPassiveParty>& passives,
                                  VflActiveParty& active, int round) {
  Tensor h_sum;
  for (std::size_t k = 0; k < passives.size(); ++k) {
    if (passives[k].obf.enabled) {
      passives[k].bottom.set_passport(passives[k].inference_passport);
    }
    const Tensor h = passives[k].bottom.forward(passives[k].test_features);
    if (k == 0) {
      h_sum = h;
    } else {
      h_sum += h;
    }
  }
  if (active.obf.enabled) active.top.set_passport(active.inference_passport);
  const Tensor logits = active.top.forward(h_sum);
  MetricsRecord rec;
  rec.round = round;
  rec.party = active.name;
  rec.split = "test";
  rec.loss = softmax_xent(logits, active.test_labels).loss;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < active.test_labels.size(); ++i)
    if (argmax_row(logits, i) == static_cast<std::size_t>(active.test_labels[i])) ++hits;
  rec.accuracy = static_cast<double>(hits) / static_cast<double>(active.test_labels.size());
  return rec;
}

struct VflRunConfig {
  std::size_t rounds = 10;  // epochs over the aligned training set
  std::size_t batch_size = 32;
  DefenseConfig defense;
  std::uint64_t seed = 0;
  bool keep_message_log = false;
};

struct VflRun {
  std::vector<VflPassiveParty> passives;
  VflActiveParty active;
  std::vector<MetricsRecord> metrics;
  MessageLog messages;
};

inline VflRun run_vfl(std::vector<VflPassiveParty> passives, VflActiveParty active,
                      const VflRunConfig& cfg) {
  if (passives.empty()) throw ConfigError("run_vfl wants >= 1 passive party");
  VflRun run;
  run.passives = std::move(passives);
  run.active = std::move(active);
  Rng batch_rng(derive_seed(cfg.seed, 0xba7c4));
  Rng defense_rng(derive_seed(cfg.seed, 0xdef));

  const std::size_t n = run.active.train_labels.size();
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    const std::vector<std::size_t> order = detail::epoch_order(n, batch_rng);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const std::vector<std::size_t> batch(order.begin() + start, order.begin() + start + count);
      loss_sum += vfl_step(run.passives, run.active, batch, int(round), cfg.defense,
                           defense_rng, cfg.keep_message_log ? &run.messages : nullptr);
      ++batches;
    }
    run.metrics.push_back({int(round), run.active.name, "train",
                           loss_sum / static_cast<double>(batches), 0.0});
    run.metrics.push_back(vfl_evaluate(run.passives, run.active, int(round)));
  }
  return run;
}

// Concatenates bottom and top layer stacks into one centralized model; used
// by the passthrough-equivalence checks.
inline Model concat_models(const Model& bottom, const Model& top) {
  Model out = bottom;
  for (const Layer& l : top.layers) out.layers.push_back(l);
  return out;
}

}  // namespace fedadob

#endif  // FEDADOB_FEDSIM_HPP
