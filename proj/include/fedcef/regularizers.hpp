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

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"

namespace fedcef {

enum class RegularizerKind { Zero, L1 };

inline std::string_view to_string(RegularizerKind k) {
  return k == RegularizerKind::Zero ? "zero" : "l1";
}

/// Non-smooth term h of the composite objective.
///
/// h is either identically zero or lambda * ||x||_1. Both are proper, closed
/// and convex, and Zero behaves exactly like L1 with lambda = 0.
class Regularizer {
 public:
  Regularizer() = default;

  static Regularizer zero() { return Regularizer(RegularizerKind::Zero, 0.0); }

  static Regularizer l1(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw DomainError("Regularizer::l1: lambda must be finite and >= 0");
    }
    return Regularizer(RegularizerKind::L1, lambda);
  }

  [[nodiscard]] RegularizerKind kind() const noexcept { return kind_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }

  // Soft-threshold level applied by prox(tau, .).
  [[nodiscard]] double threshold(double tau) const noexcept { return tau * lambda_; }

  /// argmin_u h(u) + ||u - x||^2 / (2 tau).
  ///
  /// For L1 this is componentwise soft-thresholding at tau * lambda. A zero
  /// threshold returns x untouched, bit for bit.
  [[nodiscard]] ParamVector prox(double tau, const ParamVector& x) const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
      throw DomainError("prox: tau must be finite and >= 0");
    }
    const double thr = threshold(tau);
    if (kind_ == RegularizerKind::Zero || thr == 0.0) return x;
    ParamVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double mag = std::abs(x[j]) - thr;
      out[j] = mag > 0.0 ? std::copysign(mag, x[j]) : 0.0;
    }
    return out;
  }

  [[nodiscard]] double evaluate(const ParamVector& x) const {
    if (kind_ == RegularizerKind::Zero) return 0.0;
    return lambda_ * l1_norm(x);
  }

  // B_h with ||h'(z)||^2 <= B_h for every subgradient: each component of an
  // L1 subgradient lies in [-lambda, lambda].
  [[nodiscard]] double subgradient_bound(std::size_t dim) const {
    if (dim == 0) throw DomainError("subgradient_bound: dimension must be >= 1");
    if (kind_ == RegularizerKind::Zero) return 0.0;
    return lambda_ * lambda_ * static_cast<double>(dim);
  }

  bool operator==(const Regularizer&) const = default;

 private:
  Regularizer(RegularizerKind kind, double lambda) : kind_(kind), lambda_(lambda) {}

  RegularizerKind kind_ = RegularizerKind::Zero;
  double lambda_ = 0.0;
};

inline ParamVector prox(const Regularizer& reg, double tau, const ParamVector& x) {
  return reg.prox(tau, x);
}

}  // namespace fedcef
