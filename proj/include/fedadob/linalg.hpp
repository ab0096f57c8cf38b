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

#ifndef FEDADOB_LINALG_HPP
#define FEDADOB_LINALG_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/tensor.hpp"

// Small dense matrix helpers for the linear-model analysis and the
// least-squares attacks. Everything here is O(n^3) on matrices of dim <= a
// few hundred; no BLAS needed at that scale.

namespace fedadob::linalg {

inline void require_matrix(const Tensor& m, const char* who) {
  if (m.ndim() != 2) throw DimensionError(std::string(who) + " wants a 2-D tensor");
}

inline Tensor matvec(const Tensor& m, const Tensor& v) {
  require_matrix(m, "matvec");
  if (v.ndim() != 1 || v.size() != m.extent(1)) {
    throw DimensionError("matvec dim mismatch: " + shape_str(m.shape()) + " * " +
                         shape_str(v.shape()));
  }
  Tensor out({m.extent(0)});
  for (std::size_t i = 0; i < m.extent(0); ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < m.extent(1); ++j) acc += m.at(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.extent(1) != b.extent(0)) {
    throw DimensionError("matmul dim mismatch: " + shape_str(a.shape()) + " * " +
                         shape_str(b.shape()));
  }
  Tensor out({a.extent(0), b.extent(1)});
  for (std::size_t i = 0; i < a.extent(0); ++i)
    for (std::size_t k = 0; k < a.extent(1); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.extent(1); ++j) out.at(i, j) += aik * b.at(k, j);
    }
  return out;
}

inline Tensor transpose(const Tensor& m) {
  require_matrix(m, "transpose");
  Tensor out({m.extent(1), m.extent(0)});
  for (std::size_t i = 0; i < m.extent(0); ++i)
    for (std::size_t j = 0; j < m.extent(1); ++j) out.at(j, i) = m.at(i, j);
  return out;
}

inline Tensor identity(std::size_t n) {
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

inline Tensor diag(const Tensor& v) {
  if (v.ndim() != 1) throw DimensionError("diag wants a vector");
  Tensor out({v.size(), v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) out.at(i, i) = v[i];
  return out;
}

// Solves A X = B in place via Gaussian elimination with partial pivoting.
// B can carry multiple right-hand sides as columns.
inline Tensor solve(Tensor a, Tensor b) {
  require_matrix(a, "solve");
  const std::size_t n = a.extent(0);
  if (a.extent(1) != n) throw DimensionError("solve wants a square matrix");
  if (b.ndim() == 1) b = b.reshaped({n, 1});
  if (b.extent(0) != n) throw DimensionError("solve rhs row mismatch");
  const std::size_t m = b.extent(1);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
    if (std::abs(a.at(pivot, col)) < 1e-300) {
      throw NumericError("singular matrix in solve");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(b.at(col, j), b.at(pivot, j));
    }
    const double inv = 1.0 / a.at(col, col);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a.at(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
      for (std::size_t j = 0; j < m; ++j) b.at(r, j) -= f * b.at(col, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / a.at(i, i);
    for (std::size_t j = 0; j < m; ++j) b.at(i, j) *= inv;
  }
  return m == 1 ? b.reshaped({n}) : b;
}

inline Tensor inverse(const Tensor& a) {
  Tensor result = solve(a, identity(a.extent(0)));
  return result;
}

// Eigenvalues of a symmetric matrix via the cyclic Jacobi rotation method.
// Fine for the dim <= ~64 matrices the theory module works with.
inline std::vector<double> symmetric_eigenvalues(Tensor s) {
  require_matrix(s, "symmetric_eigenvalues");
  const std::size_t n = s.extent(0);
  if (s.extent(1) != n) throw DimensionError("symmetric_eigenvalues wants square");
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += s.at(i, j) * s.at(i, j);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(s.at(p, q)) < 1e-300) continue;
        const double theta = (s.at(q, q) - s.at(p, p)) / (2.0 * s.at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s.at(k, p), skq = s.at(k, q);
          s.at(k, p) = c * skp - sn * skq;
          s.at(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s.at(p, k), sqk = s.at(q, k);
          s.at(p, k) = c * spk - sn * sqk;
          s.at(q, k) = sn * spk + c * sqk;
        }
      }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = s.at(i, i);
  return eig;
}

inline std::vector<double> singular_values(const Tensor& m) {
  const Tensor gram = matmul(transpose(m), m);
  std::vector<double> eig = symmetric_eigenvalues(gram);
  for (double& e : eig) e = std::sqrt(std::max(0.0, e));
  return eig;
}

// Largest singular value.
inline double spectral_norm(const Tensor& m) {
  double mx = 0;
  for (double s : singular_values(m)) mx = std::max(mx, s);
  return mx;
}

inline double min_singular_value(const Tensor& m) {
  double mn = std::numeric_limits<double>::infinity();
  for (double s : singular_values(m)) mn = std::min(mn, s);
  return mn;
}

// Ridge-regularized least squares: finds X minimizing ||A X - B||_F^2 +
// ridge ||X||^2 through the normal equations. A is [n x d], B is [n x m].
inline Tensor lstsq(const Tensor& a, const Tensor& b, double ridge = 1e-10) {
  require_matrix(a, "lstsq");
  const Tensor at = transpose(a);
  Tensor gram = matmul(at, a);
  for (std::size_t i = 0; i < gram.extent(0); ++i) gram.at(i, i) += ridge;
  const Tensor rhs = b.ndim() == 1 ? matvec(at, b) : matmul(at, b);
  return solve(gram, rhs);
}

}  // namespace fedadob::linalg

#endif  // FEDADOB_LINALG_HPP
