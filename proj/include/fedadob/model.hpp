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

#ifndef FEDADOB_MODEL_HPP
#define FEDADOB_MODEL_HPP

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "fedadob/layers.hpp"
#include "fedadob/optim.hpp"
#include "fedadob/passport.hpp"

namespace fedadob {

struct ReluLayer {};

// Bridges conv feature maps into dense layers: [b x c x h x w] -> [b x chw].
struct FlattenLayer {};

// A host layer wrapped in the adaptive obfuscation, plus the passport draw
// currently in effect. The draw is swapped by the refresh policy, never
// trained.
struct PassportLayer {
  PassportLayerParams params;
  Passport passport;
};

using Layer = std::variant<DenseLayer, Conv2dLayer, ReluLayer, FlattenLayer, PassportLayer>;

struct ModelCache {
  struct DenseC {
    Tensor x;
  };
  struct ConvC {
    Tensor x;
  };
  struct ReluC {
    Tensor x;
  };
  struct FlattenC {
    Shape in_shape;
  };
  using LayerCache = std::variant<DenseC, ConvC, ReluC, FlattenC, ObfuscationCache>;
  std::vector<LayerCache> per_layer;
  Tensor output;
};

// A plain sequential network. Value semantics: copying a Model snapshots it.
class Model {
 public:
  std::vector<Layer> layers;

  Model() = default;
  explicit Model(std::vector<Layer> ls) : layers(std::move(ls)) {}

  Tensor forward(const Tensor& x, ModelCache* cache = nullptr) const {
    if (cache) {
      cache->per_layer.clear();
      cache->per_layer.reserve(layers.size());
    }
    Tensor cur = x;
    for (const Layer& layer : layers) {
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        if (cache) cache->per_layer.push_back(ModelCache::DenseC{cur});
        cur = dense_forward(*d, cur);
      } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
        if (cache) cache->per_layer.push_back(ModelCache::ConvC{cur});
        cur = conv2d_forward(*c, cur);
      } else if (std::holds_alternative<ReluLayer>(layer)) {
        if (cache) cache->per_layer.push_back(ModelCache::ReluC{cur});
        cur = relu(cur);
      } else if (std::holds_alternative<FlattenLayer>(layer)) {
        if (cache) cache->per_layer.push_back(ModelCache::FlattenC{cur.shape()});
        if (cur.ndim() < 2) throw DimensionError("flatten wants a batched input");
        cur = cur.reshaped({cur.extent(0), cur.size() / cur.extent(0)});
      } else {
        const auto& p = std::get<PassportLayer>(layer);
        auto [y, oc] = obfuscate_forward(p.params, cur, p.passport);
        if (cache) cache->per_layer.push_back(std::move(oc));
        cur = std::move(y);
      }
    }
    if (cache) cache->output = cur;
    return cur;
  }

  // Propagates grad_out back to the input. `grads` is filled in param_ptrs()
  // order. Caches must come from the immediately preceding forward.
  Tensor backward(const ModelCache& cache, const Tensor& grad_out,
                  std::vector<Tensor>& grads) const {
    if (cache.per_layer.size() != layers.size()) {
      throw ContractError("model backward: cache/layer count mismatch");
    }
    grads.assign(param_count(), Tensor());
    std::size_t slot = param_count();
    Tensor g = grad_out;
    for (std::size_t li = layers.size(); li-- > 0;) {
      const Layer& layer = layers[li];
      const auto& lc = cache.per_layer[li];
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        DenseGrads dg = dense_backward(*d, std::get<ModelCache::DenseC>(lc).x, g);
        grads[slot - 1] = std::move(dg.b);
        grads[slot - 2] = std::move(dg.W);
        slot -= 2;
        g = std::move(dg.x);
      } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
        Conv2dGrads cg = conv2d_backward(*c, std::get<ModelCache::ConvC>(lc).x, g);
        grads[slot - 1] = std::move(cg.b);
        grads[slot - 2] = std::move(cg.W);
        slot -= 2;
        g = std::move(cg.x);
      } else if (std::holds_alternative<ReluLayer>(layer)) {
        g = relu_backward(std::get<ModelCache::ReluC>(lc).x, g);
      } else if (std::holds_alternative<FlattenLayer>(layer)) {
        g = g.reshaped(std::get<ModelCache::FlattenC>(lc).in_shape);
      } else {
        const auto& p = std::get<PassportLayer>(layer);
        ObfuscationGrads og =
            obfuscate_backward(p.params, std::get<ObfuscationCache>(lc), g);
        grads[slot - 5] = std::move(og.host_W);
        grads[slot - 4] = std::move(og.encoder_W);
        grads[slot - 3] = std::move(og.encoder_b);
        grads[slot - 2] = std::move(og.decoder_W);
        grads[slot - 1] = std::move(og.decoder_b);
        slot -= 5;
        g = std::move(og.x_in);
      }
    }
    return g;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const Layer& layer : layers) {
      if (std::holds_alternative<DenseLayer>(layer) ||
          std::holds_alternative<Conv2dLayer>(layer)) {
        n += 2;
      } else if (std::holds_alternative<PassportLayer>(layer)) {
        n += 5;
      }
    }
    return n;
  }

  std::vector<Tensor*> param_ptrs() {
    std::vector<Tensor*> out;
    for (Layer& layer : layers) {
      if (auto* d = std::get_if<DenseLayer>(&layer)) {
        out.push_back(&d->W);
        out.push_back(&d->b);
      } else if (auto* c = std::get_if<Conv2dLayer>(&layer)) {
        out.push_back(&c->W);
        out.push_back(&c->b);
      } else if (auto* p = std::get_if<PassportLayer>(&layer)) {
        out.push_back(&p->params.host_W());
        out.push_back(&p->params.ae.encoder_W);
        out.push_back(&p->params.ae.encoder_b);
        out.push_back(&p->params.ae.decoder_W);
        out.push_back(&p->params.ae.decoder_b);
      }
    }
    return out;
  }

  std::vector<const Tensor*> param_ptrs() const {
    std::vector<const Tensor*> out;
    for (const Tensor* t : const_cast<Model*>(this)->param_ptrs()) out.push_back(t);
    return out;
  }

  bool has_passport_layer() const {
    for (const Layer& layer : layers)
      if (std::holds_alternative<PassportLayer>(layer)) return true;
    return false;
  }

  void set_passport(const Passport& p) {
    for (Layer& layer : layers)
      if (auto* pl = std::get_if<PassportLayer>(&layer)) pl->passport = p;
  }

  void set_freeze_obfuscation(bool freeze) {
    for (Layer& layer : layers)
      if (auto* pl = std::get_if<PassportLayer>(&layer))
        pl->params.freeze_obfuscation = freeze;
  }
};

// What an attacker without the passports assumes the model to be: every
// passport layer collapses to its bare host (gamma = 1, beta = 0).
inline Model strip_passports(const Model& m) {
  Model out;
  out.layers.reserve(m.layers.size());
  for (const Layer& layer : m.layers) {
    if (const auto* p = std::get_if<PassportLayer>(&layer)) {
      if (const auto* dense = std::get_if<DenseLayer>(&p->params.host)) {
        out.layers.emplace_back(
            DenseLayer{dense->W, Tensor({dense->out_dim()}), /*use_bias=*/false});
      } else {
        const auto& conv = std::get<Conv2dLayer>(p->params.host);
        out.layers.emplace_back(Conv2dLayer{conv.W, Tensor({conv.out_channels()}),
                                            conv.stride, conv.padding, /*use_bias=*/false});
      }
    } else {
      out.layers.push_back(layer);
    }
  }
  return out;
}

// One SGD step on a cross-entropy batch. Returns the loss before the update.
inline double train_step(Model& model, const Tensor& x, const std::vector<int>& labels,
                         const SgdConfig& cfg, SgdState& state) {
  ModelCache cache;
  const Tensor logits = model.forward(x, &cache);
  LossResult loss = softmax_xent(logits, labels);
  std::vector<Tensor> grads;
  model.backward(cache, loss.grad, grads);
  sgd_step(model.param_ptrs(), grads, cfg, state);
  return loss.loss;
}

inline double accuracy(const Model& model, const Tensor& x, const std::vector<int>& labels) {
  const Tensor logits = model.forward(x);
  if (logits.ndim() != 2 || logits.extent(0) != labels.size()) {
    throw DimensionError("accuracy: logits/label mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (argmax_row(logits, s) == static_cast<std::size_t>(labels[s])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace fedadob

#endif  // FEDADOB_MODEL_HPP
