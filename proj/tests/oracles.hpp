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

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it is meant to check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "fedcef/fedcef.hpp"

namespace fedcef::testing {

// argmin_u 1/2 (u - x)^2 + w |u| over a uniform grid on [lo, hi].
inline double grid_prox_l1(double x, double w, double lo = -5.0, double hi = 5.0, double step = 1e-4) {
  double best_u = lo;
  double best = std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= n; ++i) {
    const double u = lo + static_cast<double>(i) * step;
    const double v = 0.5 * (u - x) * (u - x) + w * std::abs(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  return best_u;
}

// Central differences of a scalar function.
inline std::vector<double> central_difference(const std::function<double(const ParamVector&)>& f,
                                              const ParamVector& x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    ParamVector xp = x;
    ParamVector xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// f(x) re-summed per client and per sample straight from the raw data.
inline double resum_smooth(const FederatedProblem& prob, const ParamVector& x) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < prob.num_clients(); ++i) {
    long double fi = 0.0L;
    if (prob.loss() == LossKind::HeteroQuadratic) {
      const auto& q = prob.quadratic(i);
      for (std::size_t j = 0; j < prob.dim(); ++j) {
        const long double d = static_cast<long double>(x[j]) - q.center[j];
        fi += 0.5L * q.curvature[j] * d * d;
      }
    } else {
      const auto& s = prob.shard(i);
      for (std::size_t r = 0; r < s.rows; ++r) {
        long double u = 0.0L;
        for (std::size_t j = 0; j < prob.dim(); ++j) u += static_cast<long double>(s.features[r * prob.dim() + j]) * x[j];
        const long double y = s.labels[r];
        switch (prob.loss()) {
          case LossKind::SquaredError: fi += 0.5L * (u - y) * (u - y); break;
          case LossKind::Logistic: fi += std::log1p(std::exp(static_cast<double>(-y * u))); break;
          case LossKind::SigmoidNonconvex: fi += 1.0L / (1.0L + std::exp(static_cast<double>(y * u))); break;
          default: break;
        }
      }
      fi /= static_cast<long double>(s.rows);
    }
    total += fi;
  }
  return static_cast<double>(total / static_cast<long double>(prob.num_clients()));
}

// Closed-form minimizer of (1/N) sum_i 1/2 sum_j H_ij (x_j - m_ij)^2.
inline ParamVector quadratic_optimum(const FederatedProblem& prob) {
  ParamVector x(prob.dim());
  for (std::size_t j = 0; j < prob.dim(); ++j) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < prob.num_clients(); ++i) {
      num += prob.quadratic(i).curvature[j] * prob.quadratic(i).center[j];
      den += prob.quadratic(i).curvature[j];
    }
    x[j] = num / den;
  }
  return x;
}

inline ParamVector random_vector(RngStream& rng, std::size_t dim, double scale = 1.0) {
  ParamVector v(dim);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

inline FederatedProblem hetero_quadratic_problem(std::size_t clients, std::size_t dim, std::uint64_t seed,
                                                 double curv_lo = 0.1, double curv_hi = 10.0) {
  SyntheticSpec spec;
  spec.loss = LossKind::HeteroQuadratic;
  spec.dim = dim;
  spec.clients = clients;
  spec.spread.curvature_lo = curv_lo;
  spec.spread.curvature_hi = curv_hi;
  RngStream rng(seed, "problem");
  return generate_synthetic(spec, rng).problem;
}

inline FederatedProblem sample_problem(LossKind loss, std::size_t dim, std::size_t samples, std::size_t clients,
                                       std::uint64_t seed, PartitionSpec part = PartitionSpec::iid()) {
  SyntheticSpec spec;
  spec.loss = loss;
  spec.dim = dim;
  spec.samples = samples;
  spec.clients = clients;
  spec.partition = part;
  RngStream rng(seed, "problem");
  return generate_synthetic(spec, rng).problem;
}

}  // namespace fedcef::testing
