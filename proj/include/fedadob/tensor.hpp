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

#ifndef FEDADOB_TENSOR_HPP
#define FEDADOB_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedadob/errors.hpp"

namespace fedadob {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// Dense row-major n-dimensional array of doubles. The one numeric carrier
// shared by layers, passports, attacks and the theory checks.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {
    check_shape();
  }

  Tensor(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (shape_size(shape_) != data_.size()) {
      throw DimensionError("tensor data size " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = v;
    return t;
  }

  static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }

  static Tensor vector(std::vector<double> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
  }

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix literal");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2-D accessors; most layer math is matrix shaped.
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  // Same data, different shape. Element count must be preserved.
  Tensor reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size()) {
      throw DimensionError("cannot reshape " + shape_str(shape_) + " (" +
                           std::to_string(data_.size()) + " values) to " +
                           shape_str(shape));
    }
    return Tensor(std::move(shape), data_);
  }

  Tensor flattened() const { return reshaped({data_.size()}); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  Tensor& operator-=(const Tensor& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  Tensor& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  void check_shape() const {
    for (std::size_t e : shape_) {
      if (e == 0) throw DimensionError("zero extent in shape " + shape_str(shape_));
    }
  }

  void require_same_shape(const Tensor& o, const char* op) const {
    if (!same_shape(o)) {
      throw DimensionError(std::string("shape mismatch in ") + op + ": " +
                           shape_str(shape_) + " vs " + shape_str(o.shape_));
    }
  }

  Shape shape_;
  std::vector<double> data_;
};

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("hadamard shape mismatch: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

inline double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw DimensionError("dot size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(const Tensor& t) {
  double s = 0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * t[i];
  return std::sqrt(s);
}

inline double max_abs(const Tensor& t) {
  double m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t[i]));
  return m;
}

inline void ensure_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + where);
  }
}

inline void ensure_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite value produced by ") + where);
  }
}

}  // namespace fedadob

#endif  // FEDADOB_TENSOR_HPP
