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

#ifndef FEDADOB_THEORY_HPP
#define FEDADOB_THEORY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fedadob/linalg.hpp"
#include "fedadob/rng.hpp"
#include "fedadob/tensor.hpp"

// Numeric verification of the linear split-model privacy guarantees: the
// closed-form recovery-gap identities, the guessing-probability bound, and
// the label-recovery lower bound.

namespace fedadob::theory {

// Linear bottom/top pair: H = (W_p s_p_gamma) (.) (W_p x) + W_p s_p_beta and
// y = (W_a s_a_gamma) (.) (W_a H) + W_a s_a_beta, with "(.)" elementwise.
struct LinearSplitModel {
  Tensor W_p;  // [m x m], smallest singular value >= 1e-6
  Tensor W_a;  // [k x m]
  Tensor s_p_gamma, s_p_beta;  // [m]
  Tensor s_a_gamma, s_a_beta;  // [m]
};

inline constexpr double kMinSingularValue = 1e-6;

inline LinearSplitModel random_split_model(std::size_t m, std::size_t k, Rng& rng) {
  LinearSplitModel model;
  do {
    model.W_p = rng.normal_tensor({m, m});
  } while (linalg::min_singular_value(model.W_p) < kMinSingularValue);
  model.W_a = rng.normal_tensor({k, m});
  model.s_p_gamma = rng.normal_tensor({m});
  model.s_p_beta = rng.normal_tensor({m});
  model.s_a_gamma = rng.normal_tensor({m});
  model.s_a_beta = rng.normal_tensor({m});
  return model;
}

inline Tensor linear_bottom_forward(const LinearSplitModel& model, const Tensor& x) {
  const Tensor scale = linalg::matvec(model.W_p, model.s_p_gamma);
  const Tensor wx = linalg::matvec(model.W_p, x);
  const Tensor shift = linalg::matvec(model.W_p, model.s_p_beta);
  return hadamard(scale, wx) + shift;
}

namespace detail {

inline void require_invertible(const Tensor& w, const char* who) {
  if (linalg::min_singular_value(w) < kMinSingularValue) {
    throw ContractError(std::string(who) + " needs W_p with linearly independent columns");
  }
}

}  // namespace detail

// Beta-insertion identity: the attacker inserts a guessed passport into the
// inverse map, and the recovery gap equals the passport-guess gap exactly.
// Returns (||x - x_hat||, ||s_true - s_guess||).
inline std::pair<double, double> lemma1_beta_check(const LinearSplitModel& model,
                                                   const Tensor& x, const Tensor& s_beta_true,
                                                   const Tensor& s_beta_guess) {
  detail::require_invertible(model.W_p, "lemma1_beta_check");
  const Tensor h = linalg::matvec(model.W_p, x) + linalg::matvec(model.W_p, s_beta_true);
  const Tensor x_hat =
      linalg::solve(model.W_p, h - linalg::matvec(model.W_p, s_beta_guess));
  return {l2_norm(x - x_hat), l2_norm(s_beta_true - s_beta_guess)};
}

// Gamma-insertion inequality: ||x - x_hat|| >= ||(D^-1 - D'^-1) H|| / ||W_p||.
// Returns (lhs, rhs).
inline std::pair<double, double> lemma1_gamma_check(const LinearSplitModel& model,
                                                    const Tensor& x,
                                                    const Tensor& s_gamma_true,
                                                    const Tensor& s_gamma_guess) {
  detail::require_invertible(model.W_p, "lemma1_gamma_check");
  const Tensor d_true = linalg::matvec(model.W_p, s_gamma_true);
  const Tensor d_guess = linalg::matvec(model.W_p, s_gamma_guess);
  for (std::size_t i = 0; i < d_true.size(); ++i) {
    if (std::abs(d_true[i]) < 1e-12 || std::abs(d_guess[i]) < 1e-12) {
      throw NumericError("lemma1_gamma_check: zero diagonal entry in W_p s_gamma");
    }
  }
  const Tensor h = hadamard(d_true, linalg::matvec(model.W_p, x));
  Tensor unscaled = h;
  for (std::size_t i = 0; i < h.size(); ++i) unscaled[i] = h[i] / d_guess[i];
  const Tensor x_hat = linalg::solve(model.W_p, unscaled);

  Tensor diff({h.size()});
  for (std::size_t i = 0; i < h.size(); ++i)
    diff[i] = (1.0 / d_true[i] - 1.0 / d_guess[i]) * h[i];
  const double rhs = l2_norm(diff) / linalg::spectral_norm(model.W_p);
  return {l2_norm(x - x_hat), rhs};
}

// Gradient-inversion identity: from a single step's (grad W_p, grad b), the
// best beta-guessing reconstruction misses x by exactly the passport gap.
// `target` defines the quadratic loss pulling H toward it.
inline std::pair<double, double> lemma3_gradient_check(const LinearSplitModel& model,
                                                       const Tensor& x, const Tensor& target,
                                                       const Tensor& s_beta_true,
                                                       const Tensor& s_beta_guess) {
  const Tensor h = linalg::matvec(model.W_p, x) + linalg::matvec(model.W_p, s_beta_true);
  // Quadratic loss grad: d l / d H.
  Tensor grad_h = h - target;
  grad_h *= 2.0 / static_cast<double>(h.size());
  const Tensor grad_b = grad_h;  // H = W_p x + b with b = W_p s_beta
  double best = 0;
  std::size_t row = 0;
  for (std::size_t j = 0; j < grad_b.size(); ++j) {
    if (std::abs(grad_b[j]) > best) {
      best = std::abs(grad_b[j]);
      row = j;
    }
  }
  if (best < 1e-12) {
    throw ArgumentError("lemma3_gradient_check: grad b vanishes; identity does not apply");
  }
  // grad W_p = grad_h (x + s_beta)^T; one row over grad_b recovers x + s_beta.
  Tensor x_hat({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double grad_w_entry = grad_h[row] * (x[i] + s_beta_true[i]);
    x_hat[i] = grad_w_entry / grad_b[row] - s_beta_guess[i];
  }
  return {l2_norm(x - x_hat), l2_norm(s_beta_true - s_beta_guess)};
}

// ---------------------------------------------------------------------------
// Guessing-probability bound.
// ---------------------------------------------------------------------------

struct GuessProbability {
  double p_hat = 0;      // empirical success rate of uniform random guessing
  double bound = 0;      // pi^{m/2} eps^m / (Gamma(1 + m/2) N^m)
  double binom_std = 0;  // one standard deviation of the p_hat estimator
  bool bound_exceeds_one = false;
};

inline double guess_ball_bound(std::size_t m, double mean_range, double eps) {
  return std::pow(M_PI, m / 2.0) * std::pow(eps, double(m)) /
         (std::tgamma(1.0 + m / 2.0) * std::pow(mean_range, double(m)));
}

// Draws a secret passport uniformly from (-N, 0)^m, then measures how often a
// uniform random guesser lands within eps of it.
inline GuessProbability guess_success_probability(std::size_t m, double mean_range, double eps,
                                                  std::size_t trials, Rng& rng) {
  if (m == 0) throw ArgumentError("dimension must be >= 1");
  if (trials < 10000) throw ArgumentError("need >= 10^4 trials for a stable estimate");
  GuessProbability out;
  out.bound = guess_ball_bound(m, mean_range, eps);
  out.bound_exceeds_one = eps >= mean_range;
  const Tensor secret = rng.uniform_tensor({m}, -mean_range, 0.0);
  std::size_t hits = 0;
  const double eps2 = eps * eps;
  for (std::size_t t = 0; t < trials; ++t) {
    double dist2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = rng.uniform(-mean_range, 0.0) - secret[i];
      dist2 += d * d;
    }
    if (dist2 <= eps2) ++hits;
  }
  out.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  const double p = std::min(out.bound, 1.0);
  out.binom_std = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return out;
}

// ---------------------------------------------------------------------------
// Label-recovery lower bound.
// ---------------------------------------------------------------------------

struct LabelBoundResult {
  double attack_min = 0;  // min over W_att of sum_i ||(W_att - T_i) H_i||
  double bound = 0;       // pairwise bound, meaningful only when equal_h
  bool equal_h = false;
};

// Minimizes f(W) = sum_i ||W H_i - c_i||_2 by iteratively reweighted least
// squares, seeded from the squared-loss normal equations. The sum of norms is
// convex, so the objective value converges; we stop at 1e-8 stationarity of
// the smoothed objective.
inline double min_sum_of_norms(const std::vector<Tensor>& h_list,
                               const std::vector<Tensor>& c_list, std::size_t out_dim) {
  const std::size_t n = h_list.size();
  const std::size_t m = h_list[0].size();
  const double smooth = 1e-12;

  auto objective = [&](const Tensor& w) {
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor r = linalg::matvec(w, h_list[i]) - c_list[i];
      f += l2_norm(r);
    }
    return f;
  };

  auto weighted_solve = [&](const std::vector<double>& weights) {
    Tensor gram({m, m});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          gram.at(a, b) += weights[i] * h_list[i][a] * h_list[i][b];
    for (std::size_t a = 0; a < m; ++a) gram.at(a, a) += 1e-10;
    Tensor rhs({m, out_dim});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t r = 0; r < out_dim; ++r)
          rhs.at(a, r) += weights[i] * h_list[i][a] * c_list[i][r];
    // Solve gram * X = rhs, then W = X^T.
    return linalg::transpose(linalg::solve(gram, rhs));
  };

  std::vector<double> weights(n, 1.0);
  Tensor w = weighted_solve(weights);
  double prev = objective(w);
  for (int iter = 0; iter < 2000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor r = linalg::matvec(w, h_list[i]) - c_list[i];
      weights[i] = 1.0 / std::sqrt(l2_norm(r) * l2_norm(r) + smooth);
    }
    const Tensor next = weighted_solve(weights);
    const double f = objective(next);
    // Keep the IRLS iterate only if it improves; the ridge makes late
    // iterations slightly biased near zero residuals.
    if (f <= prev) {
      w = next;
      if (prev - f < 1e-8 * std::max(1.0, prev)) return f;
      prev = f;
    } else {
      return prev;
    }
  }
  return prev;
}

// T_i = diag(W_a s_gamma_i) W_a. When all H_i coincide, also evaluates the
// pairwise lower bound (1/(n_a - 1)) sum_{i1<i2} ||(T_i1 - T_i2) H||.
inline LabelBoundResult label_recovery_lower_bound(const Tensor& w_a,
                                                   const std::vector<Tensor>& h_list,
                                                   const std::vector<Tensor>& gammas) {
  if (h_list.size() < 2 || h_list.size() != gammas.size()) {
    throw ArgumentError("label_recovery_lower_bound wants n_a >= 2 aligned samples");
  }
  const std::size_t n = h_list.size();
  std::vector<Tensor> t_h(n);  // c_i = T_i H_i
  std::vector<Tensor> t_mats(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_mats[i] = linalg::matmul(linalg::diag(linalg::matvec(w_a, gammas[i])), w_a);
    t_h[i] = linalg::matvec(t_mats[i], h_list[i]);
  }

  LabelBoundResult out;
  out.equal_h = true;
  for (std::size_t i = 1; i < n && out.equal_h; ++i) {
    out.equal_h = l2_norm(h_list[i] - h_list[0]) < 1e-12;
  }
  out.attack_min = min_sum_of_norms(h_list, t_h, w_a.extent(0));
  if (out.equal_h) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        acc += l2_norm(linalg::matvec(t_mats[i] - t_mats[j], h_list[0]));
    out.bound = acc / static_cast<double>(n - 1);
  }
  return out;
}

// Specialized bound with W_a = I and H = 1: the mean pairwise passport gap.
inline double prop1_bound(const std::vector<Tensor>& gammas) {
  if (gammas.size() < 2) throw ConfigError("prop1_bound wants n_a >= 2 passports");
  double acc = 0;
  for (std::size_t i = 0; i < gammas.size(); ++i)
    for (std::size_t j = i + 1; j < gammas.size(); ++j) acc += l2_norm(gammas[i] - gammas[j]);
  return acc / static_cast<double>(gammas.size() - 1);
}

// ---------------------------------------------------------------------------
// The full verification suite, summarized per check.
// ---------------------------------------------------------------------------

struct CheckSummary {
  std::string check;
  std::size_t instances = 0;
  std::size_t violations = 0;
  // Positive margins mean slack; the worst (smallest) margin is reported.
  double worst_margin = 0;
};

inline std::vector<CheckSummary> run_theory_suite(std::uint64_t seed,
                                                  std::size_t mc_trials = 100000) {
  std::vector<CheckSummary> out;
  Rng rng(seed);

  {  // Beta-insertion equality over random instances, dims 2..16.
    CheckSummary c{"lemma1_beta_equality"};
    c.worst_margin = 1e9;
    for (int i = 0; i < 100; ++i) {
      const std::size_t m = 2 + rng.index(15);
      LinearSplitModel model = random_split_model(m, m, rng);
      const auto [lhs, rhs] = lemma1_beta_check(model, rng.normal_tensor({m}),
                                                rng.normal_tensor({m}), rng.normal_tensor({m}));
      const double gap = std::abs(lhs - rhs);
      ++c.instances;
      if (gap > 1e-9) ++c.violations;
      c.worst_margin = std::min(c.worst_margin, 1e-9 - gap);
    }
    out.push_back(c);
  }

  {  // Gamma-insertion inequality.
    CheckSummary c{"lemma1_gamma_inequality"};
    c.worst_margin = 1e9;
    for (int i = 0; i < 100; ++i) {
      const std::size_t m = 2 + rng.index(15);
      LinearSplitModel model = random_split_model(m, m, rng);
      const auto [lhs, rhs] = lemma1_gamma_check(model, rng.normal_tensor({m}),
                                                 rng.normal_tensor({m}), rng.normal_tensor({m}));
      const double margin = lhs - rhs;
      ++c.instances;
      if (margin < -1e-9) ++c.violations;
      c.worst_margin = std::min(c.worst_margin, margin);
    }
    out.push_back(c);
  }

  {  // Gradient-identity equality.
    CheckSummary c{"lemma3_gradient_equality"};
    c.worst_margin = 1e9;
    for (int i = 0; i < 100; ++i) {
      const std::size_t m = 2 + rng.index(15);
      LinearSplitModel model = random_split_model(m, m, rng);
      const auto [lhs, rhs] = lemma3_gradient_check(model, rng.normal_tensor({m}),
                                                    rng.normal_tensor({m}),
                                                    rng.normal_tensor({m}), rng.normal_tensor({m}));
      const double gap = std::abs(lhs - rhs);
      ++c.instances;
      if (gap > 1e-9) ++c.violations;
      c.worst_margin = std::min(c.worst_margin, 1e-9 - gap);
    }
    out.push_back(c);
  }

  {  // Guessing probability never beats the ball-volume bound.
    CheckSummary c{"thm1_guess_probability"};
    c.worst_margin = 1e9;
    for (std::size_t m : {1, 2, 3}) {
      for (double n_range : {2.0, 10.0, 50.0}) {
        for (double eps : {0.1, 0.5, 1.0}) {
          const GuessProbability g = guess_success_probability(m, n_range, eps, mc_trials, rng);
          const double margin = (g.bound + 3 * g.binom_std) - g.p_hat;
          ++c.instances;
          if (margin < 0) ++c.violations;
          c.worst_margin = std::min(c.worst_margin, margin);
        }
      }
    }
    out.push_back(c);
  }

  {  // Label-recovery lower bound on equal-H instances.
    CheckSummary c{"thm2_label_lower_bound"};
    c.worst_margin = 1e9;
    for (int i = 0; i < 50; ++i) {
      const std::size_t m = 2 + rng.index(5);
      const std::size_t n_a = 2 + rng.index(5);
      const Tensor w_a = rng.normal_tensor({m, m});
      const Tensor h = rng.normal_tensor({m});
      std::vector<Tensor> h_list(n_a, h);
      std::vector<Tensor> gammas;
      for (std::size_t g = 0; g < n_a; ++g) gammas.push_back(rng.normal_tensor({m}));
      const LabelBoundResult r = label_recovery_lower_bound(w_a, h_list, gammas);
      const double margin = r.attack_min - r.bound;
      ++c.instances;
      if (margin < -1e-6) ++c.violations;
      c.worst_margin = std::min(c.worst_margin, margin);
    }
    out.push_back(c);
  }

  {  // prop1 bound grows with the passport variance.
    CheckSummary c{"prop1_variance_monotone"};
    c.worst_margin = 1e9;
    const std::size_t m = 6, n_a = 4, draws = 100;
    double prev_mean = -1;
    for (double sigma2 : {1.0, 4.0, 16.0}) {
      double mean = 0;
      for (std::size_t d = 0; d < draws; ++d) {
        std::vector<Tensor> gammas;
        for (std::size_t g = 0; g < n_a; ++g)
          gammas.push_back(rng.normal_tensor({m}, -1.0, std::sqrt(sigma2)));
        mean += prop1_bound(gammas);
      }
      mean /= draws;
      if (prev_mean >= 0) {
        ++c.instances;
        const double margin = mean - prev_mean;
        if (margin <= 0) ++c.violations;
        c.worst_margin = std::min(c.worst_margin, margin);
      }
      prev_mean = mean;
    }
    out.push_back(c);
  }

  return out;
}

}  // namespace fedadob::theory

#endif  // FEDADOB_THEORY_HPP
