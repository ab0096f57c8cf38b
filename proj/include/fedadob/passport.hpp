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

#ifndef FEDADOB_PASSPORT_HPP
#define FEDADOB_PASSPORT_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>

#include "fedadob/layers.hpp"
#include "fedadob/linalg.hpp"
#include "fedadob/rng.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// ---------------------------------------------------------------------------
// Random passport generation.
//
// A passport is a pair of secret tensors (s_gamma, s_beta) shaped like one
// input of the host layer: [channels x per_channel_shape]. Channel j of each
// tensor is drawn Normal(mu_j, sigma2) around a per-channel mean mu_j sampled
// uniformly from (-passport_mean_range, 0); the means must be pairwise
// distinct.
// ---------------------------------------------------------------------------

struct PassportGenParams {
  double passport_mean_range = 50.0;  // N
  double sigma2 = 1.0;
  std::size_t channels = 1;
  Shape per_channel_shape;  // empty means scalar channels

  void validate() const {
    if (!(passport_mean_range > 0)) throw ArgumentError("passport_mean_range must be > 0");
    if (sigma2 < 0) throw ArgumentError("sigma2 must be >= 0");
    if (channels == 0) throw ArgumentError("channels must be >= 1");
  }

  Shape passport_shape() const {
    Shape s{channels};
    s.insert(s.end(), per_channel_shape.begin(), per_channel_shape.end());
    return s;
  }

  std::size_t per_channel_size() const { return shape_size(per_channel_shape); }
};

struct Passport {
  Tensor s_gamma;
  Tensor s_beta;
  Tensor mu;  // [channels], pairwise distinct, each in (-N, 0)
};

inline constexpr double kMuDistinctTolerance = 1e-9;
inline constexpr int kMuResampleBudget = 1000;

namespace detail {

// Draws channel means in (-N, 0), resampling collisions. The budget bounds
// the total number of redraws across all channels.
inline Tensor draw_distinct_means(const PassportGenParams& p, Rng& rng) {
  Tensor mu({p.channels});
  int resamples = 0;
  for (std::size_t j = 0; j < p.channels; ++j) {
    for (;;) {
      const double candidate = rng.uniform(-p.passport_mean_range, 0.0);
      bool clash = candidate >= 0.0;  // uniform() can land on the closed end
      for (std::size_t i = 0; i < j && !clash; ++i) {
        clash = std::abs(mu[i] - candidate) <= kMuDistinctTolerance;
      }
      if (!clash) {
        mu[j] = candidate;
        break;
      }
      if (++resamples > kMuResampleBudget) {
        throw GenerationError("could not draw " + std::to_string(p.channels) +
                              " pairwise-distinct passport means in (-" +
                              std::to_string(p.passport_mean_range) + ", 0)");
      }
    }
  }
  return mu;
}

inline Tensor sample_around_means(const PassportGenParams& p, const Tensor& mu, Rng& rng) {
  Tensor s(p.passport_shape());
  const double stddev = std::sqrt(p.sigma2);
  const std::size_t stride = p.per_channel_size();
  for (std::size_t j = 0; j < p.channels; ++j)
    for (std::size_t k = 0; k < stride; ++k)
      s[j * stride + k] = stddev == 0.0 ? mu[j] : rng.normal(mu[j], stddev);
  return s;
}

}  // namespace detail

inline Passport generate_passport(const PassportGenParams& params, Rng& rng) {
  params.validate();
  Passport p;
  p.mu = detail::draw_distinct_means(params, rng);
  p.s_gamma = detail::sample_around_means(params, p.mu, rng);
  p.s_beta = detail::sample_around_means(params, p.mu, rng);
  return p;
}

// Owns a party's passport stream. The channel means are fixed once per run
// (they are part of the party's secret); refresh() only redraws the Gaussian
// component, so sigma2 = 0 degenerates to one fixed passport, which is the
// fixed-obfuscation baseline row of the variance ablation.
class PassportSampler {
 public:
  PassportSampler(PassportGenParams params, std::uint64_t seed)
      : params_(std::move(params)), seed_(seed), rng_(seed) {
    params_.validate();
    mu_ = detail::draw_distinct_means(params_, rng_);
  }

  const PassportGenParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const Tensor& mu() const { return mu_; }

  Passport sample() {
    Passport p;
    p.mu = mu_;
    p.s_gamma = detail::sample_around_means(params_, mu_, rng_);
    p.s_beta = detail::sample_around_means(params_, mu_, rng_);
    return p;
  }

 private:
  PassportGenParams params_;
  std::uint64_t seed_;
  Rng rng_;
  Tensor mu_;
};

// When a party re-samples its passport: once per run (inference), once per
// batch (the default in training), or once per sample (the per-sample
// label-protection regime).
enum class RefreshPolicy { PerRun, PerBatch, PerSample };

inline const char* to_string(RefreshPolicy p) {
  switch (p) {
    case RefreshPolicy::PerRun: return "per_run";
    case RefreshPolicy::PerBatch: return "per_batch";
    case RefreshPolicy::PerSample: return "per_sample";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Average pooling to per-channel scalars.
// ---------------------------------------------------------------------------

inline Tensor avg_pool_to_channels(const Tensor& t, std::size_t channels) {
  if (channels == 0 || t.size() % channels != 0) {
    throw DimensionError("cannot pool " + std::to_string(t.size()) +
                         " values into " + std::to_string(channels) + " channels");
  }
  const std::size_t stride = t.size() / channels;
  Tensor out({channels});
  for (std::size_t j = 0; j < channels; ++j) {
    double acc = 0;
    for (std::size_t k = 0; k < stride; ++k) acc += t[j * stride + k];
    out[j] = acc / static_cast<double>(stride);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The autoencoder between W*s and the pooled scale/bias.
// ---------------------------------------------------------------------------

struct Autoencoder {
  Tensor encoder_W;  // [hidden x M]
  Tensor encoder_b;  // [hidden]
  Tensor decoder_W;  // [M x hidden]
  Tensor decoder_b;  // [M]
  double leak = 0.01;

  std::size_t flat_dim() const { return encoder_W.extent(1); }
  std::size_t hidden_dim() const { return encoder_W.extent(0); }

  void validate() const {
    if (encoder_W.ndim() != 2 || decoder_W.ndim() != 2 ||
        encoder_W.extent(0) != decoder_W.extent(1) ||
        encoder_W.extent(1) != decoder_W.extent(0) ||
        encoder_b.size() != encoder_W.extent(0) ||
        decoder_b.size() != decoder_W.extent(0)) {
      throw DimensionError("autoencoder dims inconsistent");
    }
  }

  // Kaiming-uniform-style init, hidden = max(4, ceil(M/4)).
  static Autoencoder kaiming(std::size_t flat_dim, Rng& rng) {
    const std::size_t hidden = std::max<std::size_t>(4, (flat_dim + 3) / 4);
    Autoencoder ae;
    const double enc_bound = std::sqrt(6.0 / static_cast<double>(flat_dim));
    const double dec_bound = std::sqrt(6.0 / static_cast<double>(hidden));
    ae.encoder_W = rng.uniform_tensor({hidden, flat_dim}, -enc_bound, enc_bound);
    ae.encoder_b = Tensor({hidden});
    ae.decoder_W = rng.uniform_tensor({flat_dim, hidden}, -dec_bound, dec_bound);
    ae.decoder_b = Tensor({flat_dim});
    return ae;
  }

  // An exact-identity D(E(z)) == z, used by the passthrough checks: the code
  // carries [lrelu(z); lrelu(-z)] and the decoder recombines
  // (lrelu(z) - lrelu(-z)) / (1 + leak) == z for every real z.
  static Autoencoder exact_identity(std::size_t flat_dim, double leak = 0.01) {
    Autoencoder ae;
    ae.leak = leak;
    ae.encoder_W = Tensor({2 * flat_dim, flat_dim});
    ae.encoder_b = Tensor({2 * flat_dim});
    ae.decoder_W = Tensor({flat_dim, 2 * flat_dim});
    ae.decoder_b = Tensor({flat_dim});
    const double scale = 1.0 / (1.0 + leak);
    for (std::size_t i = 0; i < flat_dim; ++i) {
      ae.encoder_W.at(i, i) = 1.0;
      ae.encoder_W.at(flat_dim + i, i) = -1.0;
      ae.decoder_W.at(i, i) = scale;
      ae.decoder_W.at(i, flat_dim + i) = -scale;
    }
    return ae;
  }
};

// ---------------------------------------------------------------------------
// The obfuscation layer g_W itself:  y = gamma (.) (W x_in) + beta, with
// gamma = Avg(D(E(W s_gamma))), beta = Avg(D(E(W s_beta))). gamma and beta
// are per-output-channel scalars broadcast over batch and spatial positions.
// ---------------------------------------------------------------------------

using HostLayer = std::variant<DenseLayer, Conv2dLayer>;

struct PassportLayerParams {
  HostLayer host;  // the host bias is unused: beta is the only additive term
  Autoencoder ae;
  bool freeze_obfuscation = false;  // treat gamma/beta as constants in backward
  // Diagnostic passthrough: pin gamma = 1, beta = 0 so the layer degenerates
  // to its bare host while the full passported pipeline still runs around it.
  bool identity_obfuscation = false;

  mutable std::uint64_t last_forward_token = 0;

  const Tensor& host_W() const {
    return std::visit([](const auto& l) -> const Tensor& { return l.W; }, host);
  }
  Tensor& host_W() {
    return std::visit([](auto& l) -> Tensor& { return l.W; }, host);
  }

  std::size_t out_channels() const {
    return std::visit([](const auto& l) { return l.W.extent(0); }, host);
  }
};

struct ObfuscationCache {
  Tensor x_in;
  Tensor host_out;  // W x_in
  struct AePath {
    Tensor s;        // passport tensor in its original shape
    Shape z_shape;   // shape of W s before flattening
    Tensor z;        // W s (flattened)
    Tensor enc_pre;  // encoder pre-activation
    Tensor code;     // lrelu(enc_pre)
    Tensor recon;    // decoder output, same size as z
    Tensor pooled;   // per-output-channel scalar (gamma or beta)
  } gamma, beta;
  std::uint64_t token = 0;
};

struct ObfuscationGrads {
  Tensor host_W;        // theta + gamma + beta path total
  Tensor host_W_theta;  // per-path pieces, kept separate for the decomposition
  Tensor host_W_gamma;
  Tensor host_W_beta;
  Tensor encoder_W, encoder_b, decoder_W, decoder_b;
  Tensor x_in;
};

namespace detail {

inline std::uint64_t next_forward_token() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

// Applies the host linear map to a single passport. Dense hosts accept
// either a flat [in] passport (W s, shape [out]) or a [in x h] passport
// matrix whose columns are transformed independently (shape [out x h]); the
// column axis is what the average pooling later contracts, mirroring the
// spatial axes of a conv passport.
inline Tensor host_apply_single(const HostLayer& host, const Tensor& s) {
  if (const auto* dense = std::get_if<DenseLayer>(&host)) {
    if (s.ndim() == 2 && s.extent(0) == dense->in_dim()) {
      const std::size_t cols = s.extent(1);
      Tensor z({dense->out_dim(), cols});
      for (std::size_t o = 0; o < dense->out_dim(); ++o)
        for (std::size_t c = 0; c < cols; ++c) {
          double acc = 0;
          for (std::size_t i = 0; i < dense->in_dim(); ++i)
            acc += dense->W.at(o, i) * s.at(i, c);
          z.at(o, c) = acc;
        }
      return z;
    }
    const Tensor flat = s.flattened();
    if (flat.size() != dense->in_dim()) {
      throw DimensionError("passport size " + std::to_string(flat.size()) +
                           " does not match host in_dim " + std::to_string(dense->in_dim()));
    }
    DenseLayer nobias{dense->W, Tensor({dense->out_dim()})};
    return dense_forward(nobias, flat);
  }
  const auto& conv = std::get<Conv2dLayer>(host);
  if (s.ndim() != 3 || s.extent(0) != conv.in_channels()) {
    throw DimensionError("conv passport must be [in_c x h x w], got " +
                         shape_str(s.shape()));
  }
  Conv2dLayer nobias{conv.W, Tensor({conv.out_channels()}), conv.stride, conv.padding};
  Shape batched{1, s.extent(0), s.extent(1), s.extent(2)};
  return conv2d_forward(nobias, s.reshaped(batched));
}

inline Tensor host_apply_batch(const HostLayer& host, const Tensor& x) {
  if (const auto* dense = std::get_if<DenseLayer>(&host)) {
    DenseLayer nobias{dense->W, Tensor({dense->out_dim()})};
    return dense_forward(nobias, x);
  }
  const auto& conv = std::get<Conv2dLayer>(host);
  Conv2dLayer nobias{conv.W, Tensor({conv.out_channels()}), conv.stride, conv.padding};
  return conv2d_forward(nobias, x);
}

struct AeForward {
  Tensor enc_pre, code, recon;
};

inline AeForward ae_forward(const Autoencoder& ae, const Tensor& z) {
  ae.validate();
  if (z.size() != ae.flat_dim()) {
    throw DimensionError("autoencoder input size " + std::to_string(z.size()) +
                         " != flat dim " + std::to_string(ae.flat_dim()));
  }
  AeForward f;
  f.enc_pre = Tensor({ae.hidden_dim()});
  for (std::size_t h = 0; h < ae.hidden_dim(); ++h) {
    double acc = ae.encoder_b[h];
    for (std::size_t i = 0; i < z.size(); ++i) acc += ae.encoder_W.at(h, i) * z[i];
    f.enc_pre[h] = acc;
  }
  f.code = f.enc_pre;
  for (std::size_t h = 0; h < f.code.size(); ++h)
    if (f.code[h] < 0) f.code[h] *= ae.leak;
  f.recon = Tensor({ae.flat_dim()});
  for (std::size_t i = 0; i < ae.flat_dim(); ++i) {
    double acc = ae.decoder_b[i];
    for (std::size_t h = 0; h < ae.hidden_dim(); ++h) acc += ae.decoder_W.at(i, h) * f.code[h];
    f.recon[i] = acc;
  }
  return f;
}

struct AeGrads {
  Tensor encoder_W, encoder_b, decoder_W, decoder_b;
  Tensor z;  // gradient wrt the autoencoder input
};

inline AeGrads ae_backward(const Autoencoder& ae, const ObfuscationCache::AePath& path,
                           const Tensor& grad_recon) {
  AeGrads g;
  g.decoder_W = Tensor(ae.decoder_W.shape());
  g.decoder_b = grad_recon;
  Tensor grad_code({ae.hidden_dim()});
  for (std::size_t i = 0; i < ae.flat_dim(); ++i) {
    const double gr = grad_recon[i];
    for (std::size_t h = 0; h < ae.hidden_dim(); ++h) {
      g.decoder_W.at(i, h) += gr * path.code[h];
      grad_code[h] += gr * ae.decoder_W.at(i, h);
    }
  }
  for (std::size_t h = 0; h < ae.hidden_dim(); ++h)
    if (path.enc_pre[h] < 0) grad_code[h] *= ae.leak;
  g.encoder_W = Tensor(ae.encoder_W.shape());
  g.encoder_b = grad_code;
  g.z = Tensor({ae.flat_dim()});
  for (std::size_t h = 0; h < ae.hidden_dim(); ++h) {
    const double gc = grad_code[h];
    if (gc == 0.0) continue;
    for (std::size_t i = 0; i < ae.flat_dim(); ++i) {
      g.encoder_W.at(h, i) += gc * path.z[i];
      g.z[i] += gc * ae.encoder_W.at(h, i);
    }
  }
  return g;
}

inline ObfuscationCache::AePath run_ae_path(const PassportLayerParams& p, const Tensor& s) {
  ObfuscationCache::AePath path;
  path.s = s;
  const Tensor z = host_apply_single(p.host, s);
  path.z_shape = z.shape();
  path.z = z.flattened();
  AeForward f = ae_forward(p.ae, path.z);
  path.enc_pre = std::move(f.enc_pre);
  path.code = std::move(f.code);
  path.recon = std::move(f.recon);
  path.pooled = avg_pool_to_channels(path.recon, p.out_channels());
  return path;
}

// Scales channel o of the host output by g[o] and adds b[o].
inline Tensor scale_shift_channels(const Tensor& host_out, const Tensor& g, const Tensor& b,
                                   std::size_t channels) {
  Tensor y = host_out;
  const std::size_t batch = host_out.extent(0);
  const std::size_t spatial = host_out.size() / (batch * channels);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t o = 0; o < channels; ++o)
      for (std::size_t k = 0; k < spatial; ++k) {
        const std::size_t idx = (s * channels + o) * spatial + k;
        y[idx] = g[o] * y[idx] + b[o];
      }
  return y;
}

}  // namespace detail

// Forward pass of the obfuscation layer. Accepts [in]/[batch x in] for a
// dense host and [batch x c x h x w] for a conv host.
inline std::pair<Tensor, ObfuscationCache> obfuscate_forward(const PassportLayerParams& p,
                                                             const Tensor& x_in,
                                                             const Passport& s) {
  ObfuscationCache cache;
  const bool squeeze = std::holds_alternative<DenseLayer>(p.host) && x_in.ndim() == 1;
  cache.x_in = squeeze ? x_in.reshaped({1, x_in.size()}) : x_in;
  cache.host_out = detail::host_apply_batch(p.host, cache.x_in);
  if (p.identity_obfuscation) {
    cache.gamma.pooled = Tensor::ones({p.out_channels()});
    cache.beta.pooled = Tensor::zeros({p.out_channels()});
  } else {
    cache.gamma = detail::run_ae_path(p, s.s_gamma);
    cache.beta = detail::run_ae_path(p, s.s_beta);
  }
  cache.token = detail::next_forward_token();
  p.last_forward_token = cache.token;

  Tensor y = detail::scale_shift_channels(cache.host_out, cache.gamma.pooled,
                                          cache.beta.pooled, p.out_channels());
  ensure_finite(y, "obfuscate_forward");
  if (squeeze) y = y.reshaped({y.size()});
  return {std::move(y), std::move(cache)};
}

// Backward pass. grad_host_W carries the sum of the three backpropagation
// paths through theta (the host weights used on x_in), gamma and beta; the
// per-path pieces stay separately visible. With freeze_obfuscation set,
// gamma/beta are constants and only the theta path survives.
inline ObfuscationGrads obfuscate_backward(const PassportLayerParams& p,
                                           const ObfuscationCache& cache,
                                           const Tensor& grad_y_raw) {
  if (cache.token == 0 || cache.token != p.last_forward_token) {
    throw ContractError("obfuscate_backward called with a stale cache");
  }
  const std::size_t channels = p.out_channels();
  const Tensor grad_y = grad_y_raw.ndim() == 1 && cache.host_out.ndim() == 2
                            ? grad_y_raw.reshaped({1, grad_y_raw.size()})
                            : grad_y_raw;
  if (!grad_y.same_shape(cache.host_out)) {
    throw DimensionError("obfuscate_backward grad shape " + shape_str(grad_y.shape()) +
                         " does not match forward output " + shape_str(cache.host_out.shape()));
  }

  const std::size_t batch = cache.host_out.extent(0);
  const std::size_t spatial = cache.host_out.size() / (batch * channels);

  // d loss / d (W x_in) plus the pooled-scalar gradients.
  Tensor grad_host_out = grad_y;
  Tensor d_gamma({channels});
  Tensor d_beta({channels});
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t o = 0; o < channels; ++o)
      for (std::size_t k = 0; k < spatial; ++k) {
        const std::size_t idx = (s * channels + o) * spatial + k;
        d_gamma[o] += grad_y[idx] * cache.host_out[idx];
        d_beta[o] += grad_y[idx];
        grad_host_out[idx] = grad_y[idx] * cache.gamma.pooled[o];
      }

  ObfuscationGrads out;

  // theta path: the host layer applied to x_in, gamma held constant.
  if (const auto* dense = std::get_if<DenseLayer>(&p.host)) {
    DenseLayer nobias{dense->W, Tensor({dense->out_dim()})};
    DenseGrads g = dense_backward(nobias, cache.x_in, grad_host_out);
    out.host_W_theta = std::move(g.W);
    out.x_in = std::move(g.x);
  } else {
    const auto& conv = std::get<Conv2dLayer>(p.host);
    Conv2dLayer nobias{conv.W, Tensor({conv.out_channels()}), conv.stride, conv.padding};
    Conv2dGrads g = conv2d_backward(nobias, cache.x_in, grad_host_out);
    out.host_W_theta = std::move(g.W);
    out.x_in = std::move(g.x);
  }

  out.host_W = out.host_W_theta;
  out.host_W_gamma = Tensor(p.host_W().shape());
  out.host_W_beta = Tensor(p.host_W().shape());
  out.encoder_W = Tensor(p.ae.encoder_W.shape());
  out.encoder_b = Tensor(p.ae.encoder_b.shape());
  out.decoder_W = Tensor(p.ae.decoder_W.shape());
  out.decoder_b = Tensor(p.ae.decoder_b.shape());

  if (p.freeze_obfuscation || p.identity_obfuscation) return out;

  // gamma and beta paths: pooled scalar -> mean pool -> autoencoder -> W s.
  const std::size_t pool = cache.gamma.recon.size() / channels;
  auto run_path = [&](const ObfuscationCache::AePath& path, const Tensor& d_pooled,
                      Tensor& host_W_path) {
    Tensor grad_recon({path.recon.size()});
    for (std::size_t o = 0; o < channels; ++o)
      for (std::size_t k = 0; k < pool; ++k)
        grad_recon[o * pool + k] = d_pooled[o] / static_cast<double>(pool);
    detail::AeGrads ag = detail::ae_backward(p.ae, path, grad_recon);
    out.encoder_W += ag.encoder_W;
    out.encoder_b += ag.encoder_b;
    out.decoder_W += ag.decoder_W;
    out.decoder_b += ag.decoder_b;
    // z = W s: the gradient wrt W is the single-sample host backward with the
    // passport as input.
    if (const auto* dense = std::get_if<DenseLayer>(&p.host)) {
      if (path.s.ndim() == 2 && path.s.extent(0) == dense->in_dim()) {
        // Columnwise form: grad_W = grad_z s^T.
        host_W_path = linalg::matmul(ag.z.reshaped(path.z_shape), linalg::transpose(path.s));
      } else {
        DenseLayer nobias{dense->W, Tensor({dense->out_dim()})};
        DenseGrads g = dense_backward(nobias, path.s.flattened(), ag.z);
        host_W_path = std::move(g.W);
      }
    } else {
      const auto& conv = std::get<Conv2dLayer>(p.host);
      Conv2dLayer nobias{conv.W, Tensor({conv.out_channels()}), conv.stride, conv.padding};
      const Shape batched{1, path.s.extent(0), path.s.extent(1), path.s.extent(2)};
      Conv2dGrads g = conv2d_backward(nobias, path.s.reshaped(batched),
                                      ag.z.reshaped(path.z_shape));
      host_W_path = std::move(g.W);
    }
    out.host_W += host_W_path;
  };
  run_path(cache.gamma, d_gamma, out.host_W_gamma);
  run_path(cache.beta, d_beta, out.host_W_beta);
  return out;
}

// Initial obfuscation magnitude as a function of the passport mean range:
// grows with N and saturates, so the layer stays numerically trainable for
// the whole N grid while small and large ranges remain distinguishable.
inline double obfuscation_scale_anchor(double passport_mean_range) {
  return 3.0 * passport_mean_range / (passport_mean_range + 3.0);
}

// Builds a passport layer around a host, sizing the autoencoder from the
// host-transformed passport shape. The decoder is rescaled so that a probe
// passport lands at the anchor magnitude; raw kaiming output would scale
// linearly with the passport mean range and blow up training.
inline PassportLayerParams make_passport_layer(HostLayer host, const PassportGenParams& gen,
                                               Rng& rng) {
  PassportLayerParams p;
  p.host = std::move(host);
  Tensor shape_probe(gen.passport_shape());
  const std::size_t flat = detail::host_apply_single(p.host, shape_probe).size();
  p.ae = Autoencoder::kaiming(flat, rng);

  Rng probe_rng = rng.split();
  const Passport probe = generate_passport(gen, probe_rng);
  const Tensor z = detail::host_apply_single(p.host, probe.s_gamma).flattened();
  const Tensor recon = detail::ae_forward(p.ae, z).recon;
  double mean_abs = 0;
  for (std::size_t i = 0; i < recon.size(); ++i) mean_abs += std::abs(recon[i]);
  mean_abs /= static_cast<double>(recon.size());
  const double k = obfuscation_scale_anchor(gen.passport_mean_range) / std::max(mean_abs, 1e-9);
  p.ae.decoder_W *= k;
  p.ae.decoder_b *= k;
  return p;
}

// A passport that makes a dense-host layer behave exactly like the plain
// layer when paired with an exact-identity autoencoder: gamma == 1 (s_gamma
// solves W s = 1 through the normal equations) and beta == 0 (s_beta = 0).
// Requires in_dim >= out_dim and full row rank.
inline Passport passthrough_passport(const DenseLayer& host) {
  const Tensor wt = linalg::transpose(host.W);
  const Tensor gram = linalg::matmul(host.W, wt);  // [out x out]
  const Tensor ones = Tensor::ones({host.out_dim()});
  const Tensor y = linalg::solve(gram, ones);
  Passport p;
  p.s_gamma = linalg::matvec(wt, y);
  p.s_beta = Tensor({host.in_dim()});
  p.mu = Tensor({1});
  p.mu[0] = -1.0;  // placeholder; passthrough passports are hand-built
  return p;
}

}  // namespace fedadob

#endif  // FEDADOB_PASSPORT_HPP
