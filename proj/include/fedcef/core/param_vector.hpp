// Copyright 2026 The fedcef Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedcef/core/error.hpp"

namespace fedcef {

/// Dense model-sized vector of doubles.
///
/// Every free function below checks operand lengths and rejects results that
/// contain NaN or Inf, naming the operation that produced them. Loops always
/// run in ascending index order so repeated runs are bit-identical.
class ParamVector {
 public:
  ParamVector() = default;

  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {
    check_finite("ParamVector(fill)");
  }

  ParamVector(std::initializer_list<double> values) : values_(values) {
    check_finite("ParamVector(list)");
  }

  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {
    check_finite("ParamVector(vector)");
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] double* data() noexcept { return values_.data(); }
  [[nodiscard]] const double* data() const noexcept { return values_.data(); }

  [[nodiscard]] std::span<double> span() noexcept { return values_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const ParamVector&) const = default;

  // Throws NumericError naming `op` if any entry is NaN or Inf.
  void check_finite(std::string_view op) const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw NumericError(std::string(op) + ": non-finite value at index " +
                           std::to_string(i));
      }
    }
  }

 private:
  std::vector<double> values_;
};

inline void require_same_dim(const ParamVector& a, const ParamVector& b, std::string_view op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

inline void require_finite_scalar(double s, std::string_view op) {
  if (!std::isfinite(s)) throw NumericError(std::string(op) + ": non-finite scalar");
}

inline ParamVector add(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "add");
  ParamVector out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  out.check_finite("add");
  return out;
}

inline ParamVector subtract(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "subtract");
  ParamVector out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  out.check_finite("subtract");
  return out;
}

inline ParamVector scale(const ParamVector& a, double s) {
  require_finite_scalar(s, "scale");
  ParamVector out(a);
  for (auto& v : out) v *= s;
  out.check_finite("scale");
  return out;
}

// a + s * b
inline ParamVector axpy(const ParamVector& a, double s, const ParamVector& b) {
  require_same_dim(a, b, "axpy");
  require_finite_scalar(s, "axpy");
  ParamVector out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  out.check_finite("axpy");
  return out;
}

// y += s * x, in place.
inline void axpy_inplace(ParamVector& y, double s, const ParamVector& x) {
  require_same_dim(y, x, "axpy_inplace");
  require_finite_scalar(s, "axpy_inplace");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
  y.check_finite("axpy_inplace");
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  require_finite_scalar(acc, "dot");
  return acc;
}

inline double sq_norm(const ParamVector& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  require_finite_scalar(acc, "sq_norm");
  return acc;
}

inline double norm(const ParamVector& a) { return std::sqrt(sq_norm(a)); }

inline double inf_norm(const ParamVector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double l1_norm(const ParamVector& a) {
  double acc = 0.0;
  for (double v : a) acc += std::abs(v);
  return acc;
}

inline std::size_t count_nonzero(const ParamVector& a) {
  return static_cast<std::size_t>(
      std::count_if(a.begin(), a.end(), [](double v) { return v != 0.0; }));
}

// ||a - b||_inf without allocating.
inline double inf_distance(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "inf_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fedcef
