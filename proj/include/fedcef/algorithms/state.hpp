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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedcef/compressors.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/problems.hpp"

namespace fedcef {

/// Step sizes and loop lengths. The global step beta is always
/// alpha * eta_g * K and never set on its own.
struct HyperParams {
  double alpha = 0.06;
  double eta_g = 1.0;
  int K = 30;
  double eta = 0.1;
  BatchSize batch = BatchSize::of(64);
  int T = 400;

  [[nodiscard]] double beta() const noexcept { return alpha * eta_g * static_cast<double>(K); }

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("HyperParams: alpha must be > 0");
    if (!(eta_g > 0.0) || !std::isfinite(eta_g)) throw DomainError("HyperParams: eta_g must be > 0");
    if (K < 1) throw DomainError("HyperParams: K must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("HyperParams: eta must lie in (0, 1]");
    if (T < 1) throw DomainError("HyperParams: T must be >= 1");
    if (batch.count && *batch.count == 0) throw DomainError("HyperParams: batch size must be >= 1");
  }
};

/// Per-client state of one FedCEF participant.
struct ClientState {
  ParamVector x_hat;     // pre-proximal model
  ParamVector x;         // post-proximal model
  ParamVector c_local;   // local control variate c_i
  ParamVector v;         // momentum estimator v_i
  ParamVector z_prev;    // last global model known to the client
  ParamVector c_global;  // last reconstructed global control

  static ClientState initial(const ParamVector& z0) {
    const ParamVector zero(z0.size());
    return {z0, z0, zero, zero, z0, zero};
  }
};

struct ServerState {
  ParamVector z;
  ParamVector c_global;
  int round = 0;
  std::size_t num_clients = 0;

  static ServerState initial(const ParamVector& z0, std::size_t clients) {
    return {z0, ParamVector(z0.size()), 0, clients};
  }
};

// Gradients evaluated during one client's local loop, kept for tests.
struct LocalTrace {
  std::vector<ParamVector> gradients;
};

struct RoundTranscript {
  int round = 0;
  std::vector<SparsePayload> uplink;  // ascending client order
  SparsePayload downlink;             // dense z-tilde broadcast
  std::vector<LocalTrace> traces;     // empty unless requested
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
};

}  // namespace fedcef
