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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedcef/algorithms/state.hpp"
#include "fedcef/compressors.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/problems.hpp"
#include "fedcef/regularizers.hpp"

namespace fedcef {

/// One row of a run's output, taken after round t (t = 0 is the initial model).
struct MetricsRow {
  int t = 0;
  double objective = 0.0;                // F(z^t)
  double prox_grad_sq = 0.0;             // ||G_beta(z^t)||^2
  std::uint64_t uplink_bytes_cum = 0;
  std::uint64_t downlink_bytes_cum = 0;
  std::size_t nnz = 0;                   // nonzeros of z^t
  std::optional<double> lyapunov;
  bool condition_ok = false;

  bool operator==(const MetricsRow&) const = default;
};

/// G_beta(z) = (z - prox_{beta h}(z - beta grad f(z))) / beta, with the exact
/// global gradient. Vanishes exactly at stationary points of F.
inline ParamVector prox_gradient_mapping(const FederatedProblem& prob, const Regularizer& reg,
                                         const ParamVector& z, double beta) {
  if (!(beta > 0.0)) throw DomainError("prox_gradient_mapping: beta must be > 0");
  const auto grad = full_global_gradient(prob, z);
  const auto step = reg.prox(beta, axpy(z, -beta, grad));
  ParamVector g(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) g[j] = (z[j] - step[j]) / beta;
  g.check_finite("prox_gradient_mapping");
  return g;
}

// q (not q^2) for a compressor at dimension p.
inline double compression_q(const CompressorSpec& spec, std::size_t dim) {
  return std::sqrt(contraction_factor(spec, dim));
}

struct StepConditionReport {
  double beta_bound = 0.0;         // min{eta^2, (1-q)^2} / (25 L)
  bool beta_ok = false;
  double eta_g_bound = 0.0;        // sqrt(16 (1-q)^2 + 161 eta^2) / (5 eta (1-q))
  bool eta_g_ok = false;
  double alpha_local_bound = 0.0;  // 1 / (8 K L)
  bool alpha_ok = false;

  [[nodiscard]] bool all_ok() const noexcept { return beta_ok && eta_g_ok && alpha_ok; }
};

// Evaluates the step-size conditions of the convergence theorem and the local
// drift lemma. Only reports; never throws on a violated condition. L = 0 (a
// constant smooth part) leaves beta and alpha unbounded.
inline StepConditionReport check_step_conditions(const HyperParams& hp, double L, double q) {
  if (!(L >= 0.0) || !std::isfinite(L)) throw DomainError("check_step_conditions: L must be >= 0");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("check_step_conditions: q must lie in [0, 1)");
  if (!(hp.eta > 0.0 && hp.eta <= 1.0)) throw DomainError("check_step_conditions: eta must lie in (0, 1]");
  const double one_q = 1.0 - q;
  StepConditionReport r;
  r.beta_bound = std::min(hp.eta * hp.eta, one_q * one_q) / (25.0 * L);
  r.beta_ok = hp.beta() <= r.beta_bound;
  r.eta_g_bound = std::sqrt(16.0 * one_q * one_q + 161.0 * hp.eta * hp.eta) / (5.0 * hp.eta * one_q);
  r.eta_g_ok = hp.eta_g >= r.eta_g_bound;
  r.alpha_local_bound = 1.0 / (8.0 * static_cast<double>(hp.K) * L);
  r.alpha_ok = hp.alpha <= r.alpha_local_bound;
  return r;
}

struct LyapunovValue {
  double value = 0.0;
  bool flagged = false;  // t = 0: objective only
};

/// Realized potential
///   Psi^t = F(z^t) + 70 eta beta/(1-q)^2 * mean_i ||v_i - grad f_i(z^{t-1})||^2
///         + 8 beta/eta * ||v - grad f(z^{t-1})||^2
///         + 17 beta/(1-q) * mean_i ||v_i - c_i||^2
/// with v the mean of the v_i. Without z^{t-1} (round 0) only F(z^0) is
/// returned and the value is flagged.
inline LyapunovValue lyapunov_diagnostic(const FederatedProblem& prob, const Regularizer& reg,
                                         const HyperParams& hp, double q, const ParamVector& z,
                                         const std::optional<ParamVector>& z_prev,
                                         std::span<const ClientState> clients) {
  const double F = objective_value(prob, reg, z);
  if (!z_prev) return {F, true};
  if (clients.size() != prob.num_clients()) {
    throw DimensionError("lyapunov_diagnostic: client count does not match problem");
  }
  const double n = static_cast<double>(clients.size());
  const double beta = hp.beta();
  const double one_q = 1.0 - q;

  double local_err = 0.0;
  double comp_err = 0.0;
  ParamVector v_mean(prob.dim());
  ParamVector g_mean(prob.dim());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto gi = prob.client_gradient(i, *z_prev);
    local_err += sq_norm(subtract(clients[i].v, gi));
    comp_err += sq_norm(subtract(clients[i].v, clients[i].c_local));
    for (std::size_t j = 0; j < v_mean.size(); ++j) {
      v_mean[j] += clients[i].v[j];
      g_mean[j] += gi[j];
    }
  }
  for (std::size_t j = 0; j < v_mean.size(); ++j) {
    v_mean[j] /= n;
    g_mean[j] /= n;
  }
  const double global_err = sq_norm(subtract(v_mean, g_mean));
  const double psi = F + 70.0 * hp.eta * beta / (one_q * one_q) * (local_err / n) +
                     8.0 * beta / hp.eta * global_err + 17.0 * beta / one_q * (comp_err / n);
  return {psi, false};
}

// Psi^0 under the convention z^{-1} = z^0 with zero momenta and controls.
inline double initial_potential(const FederatedProblem& prob, const Regularizer& reg, const HyperParams& hp,
                                double q, const ParamVector& z0) {
  std::vector<ClientState> clients(prob.num_clients(), ClientState::initial(z0));
  return lyapunov_diagnostic(prob, reg, hp, q, z0, z0, clients).value;
}

inline constexpr double kDescentRate = 0.15;

inline double stochastic_coefficient(double eta, double q, std::size_t clients) {
  const double one_q = 1.0 - q;
  return 6.7 * (17.0 * eta / static_cast<double>(clients) + 14.0 * eta * eta / one_q +
                140.0 * eta * eta * eta / (one_q * one_q));
}

inline double approximation_coefficient(double eta, double q) {
  const double one_q = 1.0 - q;
  return 18.4 / kDescentRate * (16.0 + 161.0 * eta * eta / (one_q * one_q));
}

/// Right-hand side of the convergence theorem:
///   Psi0 / (0.15 beta T) + C_stoc sigma^2 / (K B) + C_approx L^2 beta^2 B_h^2 / eta_g^2.
/// A FULL batch contributes no stochastic term.
inline double theorem_residual_bound(const HyperParams& hp, double L, double q, double B_h, double sigma_sq,
                                     std::size_t clients, double psi0, int T) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("theorem_residual_bound: q must lie in [0, 1)");
  if (T < 1) throw DomainError("theorem_residual_bound: T must be >= 1");
  if (clients == 0) throw DomainError("theorem_residual_bound: need at least one client");
  const double beta = hp.beta();
  double bound = psi0 / (kDescentRate * beta * static_cast<double>(T));
  if (!hp.batch.is_full()) {
    bound += stochastic_coefficient(hp.eta, q, clients) * sigma_sq /
             (static_cast<double>(hp.K) * static_cast<double>(*hp.batch.count));
  }
  bound += approximation_coefficient(hp.eta, q) * L * L * beta * beta * B_h * B_h / (hp.eta_g * hp.eta_g);
  return bound;
}

// sigma^2 estimate: the largest single-sample gradient variance over clients at x.
inline double estimate_sigma_sq(const FederatedProblem& prob, const ParamVector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < prob.num_clients(); ++i) s = std::max(s, gradient_variance(prob, i, x));
  return s;
}

struct CommSeries {
  std::vector<std::uint64_t> uplink_cum;    // index 0: before round 1
  std::vector<std::uint64_t> downlink_cum;  // index 0: the z^0 bootstrap broadcast
};

/// Cumulative byte counters from per-round transcripts. Uplink counts every
/// client's payload; downlink counts one dense broadcast per round plus the
/// initial model.
inline CommSeries comm_accounting(std::span<const RoundTranscript> transcripts, std::size_t dim) {
  CommSeries s;
  std::uint64_t up = 0;
  std::uint64_t down = 4ULL * dim;
  s.uplink_cum.push_back(up);
  s.downlink_cum.push_back(down);
  for (const auto& tr : transcripts) {
    for (const auto& p : tr.uplink) up += payload_bytes(p);
    down += payload_bytes(tr.downlink);
    s.uplink_cum.push_back(up);
    s.downlink_cum.push_back(down);
  }
  return s;
}

}  // namespace fedcef
