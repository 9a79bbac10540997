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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedcef/algorithms/fedcef.hpp"
#include "fedcef/algorithms/state.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"
#include "fedcef/metrics.hpp"
#include "fedcef/problems.hpp"
#include "fedcef/regularizers.hpp"

namespace fedcef {

/// Naive proximal FedAvg: every client runs K steps of
/// x <- prox_{alpha h}(x - alpha g_i(x)) from z^t and the server averages the
/// post-prox models densely. No control variates, no compression.
inline MetricsSeries run_prox_fedavg(const FederatedProblem& prob, const Regularizer& reg, const HyperParams& hp,
                                     std::uint64_t seed, const RunOptions& opts = {}) {
  hp.validate();
  const std::size_t n = prob.num_clients();
  const std::size_t p = prob.dim();
  ParamVector z = opts.z0.value_or(ParamVector(p));
  require_same_dim(z, ParamVector(p), "run_prox_fedavg: z0");

  MetricsSeries out;
  const auto est = estimate_smoothness(prob);
  out.smoothness = est.L;
  out.q = 0.0;
  out.conditions = check_step_conditions(hp, est.L, 0.0);
  detail::report_conditions(out, est);
  const bool ok = out.conditions.all_ok();
  const double beta = hp.beta();

  std::uint64_t up = 0;
  std::uint64_t down = 4ULL * p;
  auto row = detail::measure(prob, reg, z, 0, beta, ok);
  row.downlink_bytes_cum = down;
  out.rows.push_back(row);

  for (int t = 0; t < hp.T; ++t) {
    ParamVector sum(p);
    RoundTranscript tr;
    tr.round = t;
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng(seed, "fedavg/client/" + std::to_string(i) + "/round/" + std::to_string(t) + "/batch");
      ParamVector x = z;
      for (int k = 0; k < hp.K; ++k) {
        const auto g = stochastic_gradient(prob, i, x, hp.batch, rng);
        x = reg.prox(hp.alpha, axpy(x, -hp.alpha, g));
      }
      for (std::size_t j = 0; j < p; ++j) sum[j] += x[j];
      tr.uplink.push_back(dense_payload(x));
      tr.uplink_bytes += payload_bytes(tr.uplink.back());
    }
    z = scale(sum, 1.0 / static_cast<double>(n));
    tr.downlink = dense_payload(z);
    tr.downlink_bytes = payload_bytes(tr.downlink);
    up += tr.uplink_bytes;
    down += tr.downlink_bytes;

    row = detail::measure(prob, reg, z, t + 1, beta, ok);
    row.uplink_bytes_cum = up;
    row.downlink_bytes_cum = down;
    out.rows.push_back(row);
    if (opts.keep_transcripts) out.transcripts.push_back(std::move(tr));
  }
  out.final_z = z;
  return out;
}

/// Centralized proximal gradient descent with the exact global gradient:
/// z^{t+1} = prox_{step h}(z^t - step grad f(z^t)). Returns z^0..z^T.
inline std::vector<ParamVector> run_centralized_pgd(const FederatedProblem& prob, const Regularizer& reg,
                                                    double step, int T,
                                                    const std::optional<ParamVector>& z0 = std::nullopt) {
  if (!(step > 0.0)) throw DomainError("run_centralized_pgd: step must be > 0");
  if (T < 0) throw DomainError("run_centralized_pgd: T must be >= 0");
  std::vector<ParamVector> traj;
  traj.reserve(static_cast<std::size_t>(T) + 1);
  traj.push_back(z0.value_or(ParamVector(prob.dim())));
  for (int t = 0; t < T; ++t) {
    const auto& z = traj.back();
    traj.push_back(reg.prox(step, axpy(z, -step, full_global_gradient(prob, z))));
  }
  return traj;
}

// Metrics rows for a PGD trajectory, measured with G_step. No bytes move.
inline MetricsSeries pgd_metrics(const FederatedProblem& prob, const Regularizer& reg, double step,
                                 const std::vector<ParamVector>& trajectory) {
  MetricsSeries out;
  out.smoothness = estimate_smoothness(prob).L;
  const bool ok = out.smoothness <= 0.0 || step <= 1.0 / out.smoothness;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    out.rows.push_back(detail::measure(prob, reg, trajectory[t], static_cast<int>(t), step, ok));
  }
  if (!trajectory.empty()) out.final_z = trajectory.back();
  return out;
}

}  // namespace fedcef
