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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedcef/algorithms/state.hpp"
#include "fedcef/compressors.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"
#include "fedcef/metrics.hpp"
#include "fedcef/problems.hpp"
#include "fedcef/regularizers.hpp"

namespace fedcef {

/// K local steps of the decoupled proximal update, starting from z:
///   x_hat^{k+1} = x_hat^k - alpha (g_i(x^k) + c - c_i)
///   x^{k+1}     = prox_{(k+1) alpha h}(x_hat^{k+1})
/// x^0 = z, so the first gradient is taken at the broadcast model itself.
/// x_hat is a pure linear accumulator of the corrected gradients.
inline ClientState local_update(const ClientState& cs, const ParamVector& z, const ParamVector& c_global,
                                const FederatedProblem& prob, std::size_t client, const Regularizer& reg,
                                const HyperParams& hp, RngStream& rng, LocalTrace* trace = nullptr) {
  cs.c_local.check_finite("local_update: c_local");
  require_same_dim(z, c_global, "local_update");
  require_same_dim(z, cs.c_local, "local_update");

  ClientState out = cs;
  out.z_prev = z;
  out.c_global = c_global;
  out.x_hat = z;
  out.x = z;
  ParamVector correction(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) correction[j] = c_global[j] - cs.c_local[j];

  if (trace) trace->gradients.clear();
  for (int k = 0; k < hp.K; ++k) {
    const auto g = stochastic_gradient(prob, client, out.x, hp.batch, rng);
    for (std::size_t j = 0; j < z.size(); ++j) out.x_hat[j] -= hp.alpha * (g[j] + correction[j]);
    try {
      out.x_hat.check_finite("local_update");
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (client " + std::to_string(client) + ", step " +
                         std::to_string(k) + ")");
    }
    out.x = reg.prox(static_cast<double>(k + 1) * hp.alpha, out.x_hat);
    if (trace) trace->gradients.push_back(g);
  }
  return out;
}

struct UplinkResult {
  SparsePayload payload;
  ClientState state;
};

/// Momentum estimate from the accumulator, then compressed error feedback:
///   v_i <- (1 - eta) v_i + eta ((x_hat^0 - x_hat^K)/(alpha K) + c_i - c)
///   Delta_i = C(v_i - c_i),  c_i <- c_i + Delta_i
inline UplinkResult client_uplink(const ClientState& cs, const HyperParams& hp, const CompressorSpec& spec,
                                  RngStream& rng) {
  ClientState out = cs;
  const double denom = hp.alpha * static_cast<double>(hp.K);
  for (std::size_t j = 0; j < out.v.size(); ++j) {
    const double acc = (cs.z_prev[j] - cs.x_hat[j]) / denom + cs.c_local[j] - cs.c_global[j];
    out.v[j] = (1.0 - hp.eta) * cs.v[j] + hp.eta * acc;
  }
  out.v.check_finite("client_uplink");
  auto compressed = compress(spec, subtract(out.v, cs.c_local), &rng);
  compressed.payload.accumulate_into(out.c_local);
  out.c_local.check_finite("client_uplink: c_local");
  return {std::move(compressed.payload), std::move(out)};
}

struct AggregateResult {
  ParamVector z_tilde;
  ServerState state;
};

/// c <- c + (1/N) sum_i Delta_i (ascending client order); z_tilde = z - beta c.
/// The server keeps z^t until server_finalize mirrors the clients' prox.
inline AggregateResult server_aggregate(const ServerState& ss, std::span<const SparsePayload> payloads,
                                        const HyperParams& hp) {
  if (payloads.size() != ss.num_clients) {
    throw DimensionError("server_aggregate: expected " + std::to_string(ss.num_clients) + " payloads, got " +
                         std::to_string(payloads.size()));
  }
  ParamVector sum(ss.z.size());
  for (const auto& p : payloads) p.accumulate_into(sum);
  ServerState out = ss;
  out.c_global = axpy(ss.c_global, 1.0 / static_cast<double>(ss.num_clients), sum);
  auto z_tilde = axpy(ss.z, -hp.beta(), out.c_global);
  return {std::move(z_tilde), std::move(out)};
}

struct DownlinkResult {
  ClientState state;
  ParamVector c_reconstructed;
};

/// Client side of the pre-proximal broadcast: recover c = (z^t - z_tilde)/beta
/// and apply z^{t+1} = prox_{beta h}(z_tilde) locally.
inline DownlinkResult client_downlink(const ClientState& cs, const ParamVector& z_tilde, const Regularizer& reg,
                                      const HyperParams& hp) {
  const double beta = hp.beta();
  if (!(beta > 0.0)) throw DomainError("client_downlink: beta must be > 0");
  require_same_dim(cs.z_prev, z_tilde, "client_downlink");
  ParamVector c(z_tilde.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = (cs.z_prev[j] - z_tilde[j]) / beta;
  c.check_finite("client_downlink");
  ClientState out = cs;
  out.z_prev = reg.prox(beta, z_tilde);
  out.c_global = c;
  return {std::move(out), std::move(c)};
}

inline ServerState server_finalize(const ServerState& ss, const ParamVector& z_tilde, const Regularizer& reg,
                                   const HyperParams& hp) {
  ServerState out = ss;
  out.z = reg.prox(hp.beta(), z_tilde);
  out.round += 1;
  return out;
}

/// Full-participation FedCEF, one round per step().
///
/// Random streams are keyed by (seed, "client/<i>/round/<t>/batch") and
/// ".../compress", so a run replays bit for bit and per-client work carries
/// no shared mutable state.
class FedCefSimulation {
 public:
  FedCefSimulation(const FederatedProblem& prob, Regularizer reg, HyperParams hp, CompressorSpec spec,
                   std::uint64_t seed, const ParamVector& z0, bool keep_traces = false)
      : prob_(&prob), reg_(reg), hp_(hp), spec_(spec), seed_(seed), keep_traces_(keep_traces) {
    hp_.validate();
    require_same_dim(z0, ParamVector(prob.dim()), "FedCefSimulation: z0");
    (void)spec_.resolve(prob.dim());
    server_ = ServerState::initial(z0, prob.num_clients());
    clients_.assign(prob.num_clients(), ClientState::initial(z0));
  }

  RoundTranscript step() {
    const int t = server_.round;
    try {
      return step_impl(t);
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(t) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError("round " + std::to_string(t) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("round " + std::to_string(t) + ": " + e.what());
    }
  }

  [[nodiscard]] const ServerState& server() const noexcept { return server_; }
  [[nodiscard]] std::span<const ClientState> clients() const noexcept { return clients_; }
  // z^{t-1}; empty before the first round.
  [[nodiscard]] const std::optional<ParamVector>& previous_z() const noexcept { return z_before_; }
  [[nodiscard]] const FederatedProblem& problem() const noexcept { return *prob_; }
  [[nodiscard]] const Regularizer& regularizer() const noexcept { return reg_; }
  [[nodiscard]] const HyperParams& hyper() const noexcept { return hp_; }
  [[nodiscard]] const CompressorSpec& compressor() const noexcept { return spec_; }

 private:
  RoundTranscript step_impl(int t) {
    const std::size_t n = clients_.size();
    RoundTranscript tr;
    tr.round = t;
    tr.uplink.reserve(n);
    if (keep_traces_) tr.traces.resize(n);

    const std::string round_tag = "/round/" + std::to_string(t);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string prefix = "client/" + std::to_string(i) + round_tag;
      RngStream batch_rng(seed_, prefix + "/batch");
      auto& cs = clients_[i];
      cs = local_update(cs, cs.z_prev, cs.c_global, *prob_, i, reg_, hp_, batch_rng,
                        keep_traces_ ? &tr.traces[i] : nullptr);
      RngStream compress_rng(seed_, prefix + "/compress");
      auto up = client_uplink(cs, hp_, spec_, compress_rng);
      cs = std::move(up.state);
      tr.uplink_bytes += payload_bytes(up.payload);
      tr.uplink.push_back(std::move(up.payload));
    }

    auto agg = server_aggregate(server_, tr.uplink, hp_);
    for (auto& cs : clients_) cs = client_downlink(cs, agg.z_tilde, reg_, hp_).state;
    z_before_ = server_.z;
    server_ = server_finalize(agg.state, agg.z_tilde, reg_, hp_);

    tr.downlink = dense_payload(agg.z_tilde);
    tr.downlink_bytes = payload_bytes(tr.downlink);
    return tr;
  }

  const FederatedProblem* prob_;
  Regularizer reg_;
  HyperParams hp_;
  CompressorSpec spec_;
  std::uint64_t seed_;
  bool keep_traces_;
  ServerState server_;
  std::vector<ClientState> clients_;
  std::optional<ParamVector> z_before_;
};

struct RunOptions {
  bool lyapunov = false;
  bool keep_transcripts = false;
  bool keep_traces = false;
  std::optional<ParamVector> z0;  // zero vector when unset
  std::function<void(const FedCefSimulation&, const RoundTranscript&)> on_round;
};

struct MetricsSeries {
  std::vector<MetricsRow> rows;  // rows[t] for t = 0..T
  StepConditionReport conditions;
  double smoothness = 0.0;
  double q = 0.0;
  std::vector<std::string> warnings;
  std::vector<RoundTranscript> transcripts;
  ParamVector final_z;
};

namespace detail {

inline MetricsRow measure(const FederatedProblem& prob, const Regularizer& reg, const ParamVector& z, int t,
                          double beta, bool condition_ok) {
  MetricsRow row;
  row.t = t;
  row.objective = objective_value(prob, reg, z);
  row.prox_grad_sq = sq_norm(prox_gradient_mapping(prob, reg, z, beta));
  row.nnz = count_nonzero(z);
  row.condition_ok = condition_ok;
  return row;
}

inline void report_conditions(MetricsSeries& out, const SmoothnessEstimate& est) {
  if (!est.converged) out.warnings.push_back("smoothness power iteration hit its iteration cap");
  const auto& c = out.conditions;
  if (!c.beta_ok) out.warnings.push_back("beta exceeds min{eta^2,(1-q)^2}/(25L) = " + std::to_string(c.beta_bound));
  if (!c.eta_g_ok) out.warnings.push_back("eta_g below its lower bound " + std::to_string(c.eta_g_bound));
  if (!c.alpha_ok) out.warnings.push_back("alpha exceeds 1/(8KL) = " + std::to_string(c.alpha_local_bound));
}

}  // namespace detail

/// Runs T rounds of FedCEF and records one MetricsRow per round (plus t = 0).
/// The step-size conditions are checked up front; a violation is recorded in
/// `warnings` and every row's condition_ok flag, but the run still proceeds.
inline MetricsSeries run_fedcef(const FederatedProblem& prob, const Regularizer& reg, const HyperParams& hp,
                                const CompressorSpec& spec, std::uint64_t seed, const RunOptions& opts = {}) {
  hp.validate();
  const ParamVector z0 = opts.z0.value_or(ParamVector(prob.dim()));
  MetricsSeries out;
  const auto est = estimate_smoothness(prob);
  out.smoothness = est.L;
  out.q = compression_q(spec, prob.dim());
  out.conditions = check_step_conditions(hp, est.L, out.q);
  detail::report_conditions(out, est);
  const bool ok = out.conditions.all_ok();
  const double beta = hp.beta();

  FedCefSimulation sim(prob, reg, hp, spec, seed, z0, opts.keep_traces);
  std::uint64_t up = 0;
  std::uint64_t down = 4ULL * prob.dim();  // z^0 bootstrap

  auto row = detail::measure(prob, reg, z0, 0, beta, ok);
  row.downlink_bytes_cum = down;
  if (opts.lyapunov) row.lyapunov = lyapunov_diagnostic(prob, reg, hp, out.q, z0, std::nullopt, sim.clients()).value;
  out.rows.push_back(row);

  for (int t = 1; t <= hp.T; ++t) {
    auto tr = sim.step();
    up += tr.uplink_bytes;
    down += tr.downlink_bytes;
    const auto& z = sim.server().z;
    try {
      row = detail::measure(prob, reg, z, t, beta, ok);
      if (opts.lyapunov) {
        row.lyapunov = lyapunov_diagnostic(prob, reg, hp, out.q, z, sim.previous_z(), sim.clients()).value;
      }
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(t) + " metrics: " + e.what());
    }
    row.uplink_bytes_cum = up;
    row.downlink_bytes_cum = down;
    out.rows.push_back(row);
    if (opts.on_round) opts.on_round(sim, tr);
    if (opts.keep_transcripts) out.transcripts.push_back(std::move(tr));
  }
  out.final_z = sim.server().z;
  return out;
}

}  // namespace fedcef
