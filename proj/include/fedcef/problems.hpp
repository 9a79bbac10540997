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
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"
#include "fedcef/regularizers.hpp"

namespace fedcef {

enum class LossKind { SquaredError, Logistic, SigmoidNonconvex, HeteroQuadratic };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::SquaredError: return "squared";
    case LossKind::Logistic: return "logistic";
    case LossKind::SigmoidNonconvex: return "sigmoid";
    case LossKind::HeteroQuadratic: return "hetero_quadratic";
  }
  return "?";
}

enum class PartitionMode { IID, Dirichlet };

struct PartitionSpec {
  PartitionMode mode = PartitionMode::IID;
  double alpha_d = 1.0;

  static PartitionSpec iid() { return {PartitionMode::IID, 1.0}; }
  static PartitionSpec dirichlet(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("PartitionSpec: Dirichlet concentration must be > 0");
    return {PartitionMode::Dirichlet, alpha};
  }
};

/// Mini-batch size; `full()` means the exact local gradient.
struct BatchSize {
  std::optional<std::size_t> count;

  static BatchSize full() { return {}; }
  static BatchSize of(std::size_t b) {
    if (b == 0) throw DomainError("BatchSize: must be >= 1 or FULL");
    return {b};
  }
  [[nodiscard]] bool is_full() const noexcept { return !count.has_value(); }
  bool operator==(const BatchSize&) const = default;
};

/// One client's samples: `rows` feature rows of length dim, row-major.
struct DataShard {
  std::size_t rows = 0;
  std::vector<double> features;
  std::vector<double> labels;

  [[nodiscard]] std::span<const double> row(std::size_t r, std::size_t dim) const {
    return {features.data() + r * dim, dim};
  }
};

/// f_i(x) = 1/2 sum_j H_j (x_j - m_j)^2.
struct QuadraticClient {
  ParamVector curvature;
  ParamVector center;
};

struct SmoothnessEstimate {
  double L = 0.0;
  bool converged = true;  // false if a power iteration hit its cap
};

namespace detail {

inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// log(1 + exp(u)) without overflow.
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

inline double row_dot(std::span<const double> a, const ParamVector& x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * x[j];
  return acc;
}

// Largest |sigma''| = sqrt(3)/18.
inline constexpr double kSigmoidCurvature = 0.096225044864937627;

}  // namespace detail

/// N client datasets plus the smooth loss they define.
///
/// f(x) = (1/N) sum_i f_i(x), each f_i the mean per-sample loss over shard i
/// (or the client's quadratic). Immutable after construction; the smoothness
/// constant is estimated once and cached.
class FederatedProblem {
 public:
  static FederatedProblem from_shards(LossKind loss, std::size_t dim, std::vector<DataShard> shards) {
    if (loss == LossKind::HeteroQuadratic) {
      throw DomainError("FederatedProblem::from_shards: use hetero_quadratic() for quadratic clients");
    }
    if (dim == 0) throw DomainError("FederatedProblem: dimension must be >= 1");
    if (shards.empty()) throw DomainError("FederatedProblem: need at least one client");
    for (std::size_t i = 0; i < shards.size(); ++i) {
      const auto& s = shards[i];
      if (s.rows == 0) throw DomainError("FederatedProblem: shard " + std::to_string(i) + " is empty");
      if (s.features.size() != s.rows * dim || s.labels.size() != s.rows) {
        throw DimensionError("FederatedProblem: shard " + std::to_string(i) + " has ragged rows");
      }
    }
    FederatedProblem p;
    p.loss_ = loss;
    p.dim_ = dim;
    p.shards_ = std::move(shards);
    p.smoothness_ = p.compute_smoothness();
    return p;
  }

  static FederatedProblem hetero_quadratic(std::vector<QuadraticClient> clients) {
    if (clients.empty()) throw DomainError("FederatedProblem: need at least one client");
    const std::size_t dim = clients.front().curvature.size();
    if (dim == 0) throw DomainError("FederatedProblem: dimension must be >= 1");
    for (const auto& c : clients) {
      require_same_dim(c.curvature, clients.front().curvature, "hetero_quadratic");
      require_same_dim(c.center, c.curvature, "hetero_quadratic");
      for (double h : c.curvature) {
        if (!(h > 0.0)) throw DomainError("hetero_quadratic: curvatures must be strictly positive");
      }
    }
    FederatedProblem p;
    p.loss_ = LossKind::HeteroQuadratic;
    p.dim_ = dim;
    p.quadratics_ = std::move(clients);
    p.smoothness_ = p.compute_smoothness();
    return p;
  }

  [[nodiscard]] LossKind loss() const noexcept { return loss_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t num_clients() const noexcept {
    return loss_ == LossKind::HeteroQuadratic ? quadratics_.size() : shards_.size();
  }
  [[nodiscard]] const DataShard& shard(std::size_t i) const { return shards_.at(i); }
  [[nodiscard]] const QuadraticClient& quadratic(std::size_t i) const { return quadratics_.at(i); }
  [[nodiscard]] const SmoothnessEstimate& smoothness() const noexcept { return smoothness_; }
  [[nodiscard]] std::size_t shard_size(std::size_t i) const {
    return loss_ == LossKind::HeteroQuadratic ? 1 : shards_.at(i).rows;
  }

  // f_i(x) using every local sample.
  [[nodiscard]] double client_loss(std::size_t i, const ParamVector& x) const {
    check_client(i);
    check_dim(x, "client_loss");
    if (loss_ == LossKind::HeteroQuadratic) {
      const auto& q = quadratics_[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        const double d = x[j] - q.center[j];
        acc += 0.5 * q.curvature[j] * d * d;
      }
      return acc;
    }
    const auto& s = shards_[i];
    double acc = 0.0;
    for (std::size_t r = 0; r < s.rows; ++r) acc += sample_loss(s.row(r, dim_), s.labels[r], x);
    return acc / static_cast<double>(s.rows);
  }

  // Exact grad f_i(x).
  [[nodiscard]] ParamVector client_gradient(std::size_t i, const ParamVector& x) const {
    check_client(i);
    check_dim(x, "client_gradient");
    ParamVector g(dim_);
    if (loss_ == LossKind::HeteroQuadratic) {
      const auto& q = quadratics_[i];
      for (std::size_t j = 0; j < dim_; ++j) g[j] = q.curvature[j] * (x[j] - q.center[j]);
    } else {
      const auto& s = shards_[i];
      for (std::size_t r = 0; r < s.rows; ++r) add_sample_gradient(g, s.row(r, dim_), s.labels[r], x);
      const double inv = 1.0 / static_cast<double>(s.rows);
      for (auto& v : g) v *= inv;
    }
    g.check_finite("client_gradient");
    return g;
  }

  // Gradient of the loss on a single local sample.
  [[nodiscard]] ParamVector sample_gradient(std::size_t i, std::size_t r, const ParamVector& x) const {
    check_client(i);
    check_dim(x, "sample_gradient");
    if (loss_ == LossKind::HeteroQuadratic) return client_gradient(i, x);
    ParamVector g(dim_);
    const auto& s = shards_.at(i);
    add_sample_gradient(g, s.row(r, dim_), s.labels.at(r), x);
    return g;
  }

  // g += grad of loss(a^T x, y).
  void add_sample_gradient(ParamVector& g, std::span<const double> a, double y, const ParamVector& x) const {
    const double u = detail::row_dot(a, x);
    const double d = loss_derivative(u, y);
    for (std::size_t j = 0; j < dim_; ++j) g[j] += d * a[j];
  }

  [[nodiscard]] double sample_loss(std::span<const double> a, double y, const ParamVector& x) const {
    const double u = detail::row_dot(a, x);
    switch (loss_) {
      case LossKind::SquaredError: return 0.5 * (u - y) * (u - y);
      case LossKind::Logistic: return detail::softplus(-y * u);
      case LossKind::SigmoidNonconvex: return detail::sigmoid(-y * u);
      case LossKind::HeteroQuadratic: break;
    }
    throw DomainError("sample_loss: not a sample-based loss");
  }

 private:
  FederatedProblem() = default;

  [[nodiscard]] double loss_derivative(double u, double y) const {
    switch (loss_) {
      case LossKind::SquaredError: return u - y;
      case LossKind::Logistic: return -y * detail::sigmoid(-y * u);
      case LossKind::SigmoidNonconvex: {
        const double s = detail::sigmoid(-y * u);
        return -y * s * (1.0 - s);
      }
      case LossKind::HeteroQuadratic: break;
    }
    throw DomainError("loss_derivative: not a sample-based loss");
  }

  void check_client(std::size_t i) const {
    if (i >= num_clients()) {
      throw DomainError("client index " + std::to_string(i) + " out of range (N = " +
                        std::to_string(num_clients()) + ")");
    }
  }
  void check_dim(const ParamVector& x, std::string_view op) const {
    if (x.size() != dim_) {
      throw DimensionError(std::string(op) + ": expected dimension " + std::to_string(dim_) + ", got " +
                           std::to_string(x.size()));
    }
  }

  // lambda_max(A^T A / n) by power iteration with a Rayleigh-quotient estimate.
  [[nodiscard]] std::pair<double, bool> spectral_norm(const DataShard& s) const {
    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-9;
    std::vector<double> v(dim_, 1.0 / std::sqrt(static_cast<double>(dim_)));
    std::vector<double> w(dim_);
    double lambda = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t r = 0; r < s.rows; ++r) {
        const auto a = s.row(r, dim_);
        double u = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) u += a[j] * v[j];
        for (std::size_t j = 0; j < dim_; ++j) w[j] += u * a[j];
      }
      double rq = 0.0;
      double nw = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        w[j] /= static_cast<double>(s.rows);
        rq += v[j] * w[j];
        nw += w[j] * w[j];
      }
      nw = std::sqrt(nw);
      if (nw == 0.0) return {0.0, true};
      for (std::size_t j = 0; j < dim_; ++j) v[j] = w[j] / nw;
      const bool done = it > 0 && std::abs(rq - lambda) <= kTol * std::abs(rq);
      lambda = rq;
      if (done) return {lambda, true};
    }
    return {lambda, false};
  }

  [[nodiscard]] SmoothnessEstimate compute_smoothness() const {
    SmoothnessEstimate est{0.0, true};
    if (loss_ == LossKind::HeteroQuadratic) {
      for (const auto& q : quadratics_) {
        for (double h : q.curvature) est.L = std::max(est.L, h);
      }
      return est;
    }
    double factor = 1.0;
    if (loss_ == LossKind::Logistic) factor = 0.25;
    if (loss_ == LossKind::SigmoidNonconvex) factor = detail::kSigmoidCurvature;
    for (const auto& s : shards_) {
      const auto [lam, ok] = spectral_norm(s);
      est.L = std::max(est.L, factor * lam);
      est.converged = est.converged && ok;
    }
    return est;
  }

  LossKind loss_ = LossKind::SquaredError;
  std::size_t dim_ = 0;
  std::vector<DataShard> shards_;
  std::vector<QuadraticClient> quadratics_;
  SmoothnessEstimate smoothness_;
};

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

// Proportions ~ Dir(alpha * 1_N); they sum to one.
inline std::vector<double> dirichlet_proportions(std::size_t n, double alpha, RngStream& rng) {
  if (n == 0) throw DomainError("dirichlet_proportions: need at least one client");
  if (!(alpha > 0.0)) throw DomainError("dirichlet_proportions: alpha must be > 0");
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> g(n);
    double sum = 0.0;
    for (auto& v : g) {
      v = rng.gamma(alpha);
      sum += v;
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      for (auto& v : g) v /= sum;
      return g;
    }
  }
  throw NumericError("dirichlet_proportions: gamma draws underflowed repeatedly");
}

// Integer counts summing to `total`, proportional to `props`: floors first,
// leftovers to the largest fractional parts (lowest index on ties).
inline std::vector<std::size_t> largest_remainder_counts(std::span<const double> props, std::size_t total) {
  std::vector<std::size_t> counts(props.size());
  std::vector<std::pair<double, std::size_t>> frac(props.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const double exact = props[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    frac[i] = {exact - std::floor(exact), i};
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < total; ++j, ++assigned) counts[frac[j % frac.size()].second] += 1;
  return counts;
}

/// Shard index for each sample, split per class with Dir(alpha_d) proportions.
///
/// Resamples the whole partition until every client owns at least one sample,
/// up to 100 attempts.
inline std::vector<std::size_t> dirichlet_partition(std::span<const int> labels, std::size_t clients,
                                                    double alpha_d, RngStream& rng) {
  if (clients == 0) throw DomainError("dirichlet_partition: need at least one client");
  if (!(alpha_d > 0.0)) throw DomainError("dirichlet_partition: alpha_d must be > 0");
  if (labels.size() < clients) throw DomainError("dirichlet_partition: fewer samples than clients");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t s = 0; s < labels.size(); ++s) by_class[labels[s]].push_back(s);

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::size_t> owner(labels.size(), 0);
    std::vector<std::size_t> load(clients, 0);
    for (auto& [cls, members] : by_class) {
      std::vector<std::size_t> idx = members;
      for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
      const auto props = dirichlet_proportions(clients, alpha_d, rng);
      const auto counts = largest_remainder_counts(props, idx.size());
      std::size_t pos = 0;
      for (std::size_t c = 0; c < clients; ++c) {
        for (std::size_t k = 0; k < counts[c]; ++k) owner[idx[pos++]] = c;
        load[c] += counts[c];
      }
    }
    if (std::all_of(load.begin(), load.end(), [](std::size_t n) { return n > 0; })) return owner;
  }
  throw DomainError("dirichlet_partition: could not give every client a sample after 100 attempts");
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

struct QuadraticSpread {
  double center_lo = -10.0;
  double center_hi = 10.0;
  double curvature_lo = 0.1;  // log-uniform
  double curvature_hi = 10.0;
};

struct SyntheticSpec {
  LossKind loss = LossKind::Logistic;
  std::size_t dim = 20;
  std::size_t samples = 500;
  std::size_t clients = 1;
  PartitionSpec partition = PartitionSpec::iid();
  double planted_density = 0.25;  // fraction of nonzero planted coordinates
  double label_noise = 0.1;       // SquaredError observation noise std
  QuadraticSpread spread{};
};

struct SyntheticProblem {
  FederatedProblem problem;
  ParamVector planted;  // empty for HeteroQuadratic
};

inline SyntheticProblem generate_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.dim == 0) throw DomainError("generate_synthetic: dim must be >= 1");
  if (spec.clients == 0) throw DomainError("generate_synthetic: need at least one client");

  if (spec.loss == LossKind::HeteroQuadratic) {
    const auto& sp = spec.spread;
    if (!(sp.curvature_lo > 0.0 && sp.curvature_hi >= sp.curvature_lo)) {
      throw DomainError("generate_synthetic: curvature range must be positive and ordered");
    }
    std::vector<QuadraticClient> qs;
    qs.reserve(spec.clients);
    const double llo = std::log(sp.curvature_lo);
    const double lhi = std::log(sp.curvature_hi);
    for (std::size_t i = 0; i < spec.clients; ++i) {
      QuadraticClient q{ParamVector(spec.dim), ParamVector(spec.dim)};
      for (std::size_t j = 0; j < spec.dim; ++j) q.curvature[j] = std::exp(rng.uniform(llo, lhi));
      for (std::size_t j = 0; j < spec.dim; ++j) q.center[j] = rng.uniform(sp.center_lo, sp.center_hi);
      qs.push_back(std::move(q));
    }
    return {FederatedProblem::hetero_quadratic(std::move(qs)), ParamVector{}};
  }

  if (spec.samples < spec.clients) throw DomainError("generate_synthetic: samples must be >= clients");

  // Planted sparse model: random support, magnitudes in [1, 2], random signs.
  ParamVector planted(spec.dim);
  const auto support = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(spec.planted_density * static_cast<double>(spec.dim))));
  std::vector<std::size_t> coords(spec.dim);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  for (std::size_t i = 0; i < std::min(support, spec.dim); ++i) {
    std::swap(coords[i], coords[i + rng.index(spec.dim - i)]);
    planted[coords[i]] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 2.0);
  }

  std::vector<double> features(spec.samples * spec.dim);
  std::vector<double> labels(spec.samples);
  std::vector<int> classes(spec.samples);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    double u = 0.0;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double a = rng.normal();
      features[s * spec.dim + j] = a;
      u += a * planted[j];
    }
    if (spec.loss == LossKind::SquaredError) {
      labels[s] = u + spec.label_noise * rng.normal();
    } else {
      labels[s] = rng.uniform01() < detail::sigmoid(u) ? 1.0 : -1.0;
    }
    classes[s] = labels[s] > 0.0 ? 1 : 0;
  }

  std::vector<std::size_t> owner(spec.samples);
  if (spec.partition.mode == PartitionMode::IID) {
    std::vector<std::size_t> perm(spec.samples);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    for (std::size_t pos = 0; pos < perm.size(); ++pos) owner[perm[pos]] = pos % spec.clients;
  } else {
    owner = dirichlet_partition(classes, spec.clients, spec.partition.alpha_d, rng);
  }

  std::vector<DataShard> shards(spec.clients);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    auto& sh = shards[owner[s]];
    sh.features.insert(sh.features.end(), features.begin() + static_cast<std::ptrdiff_t>(s * spec.dim),
                       features.begin() + static_cast<std::ptrdiff_t>((s + 1) * spec.dim));
    sh.labels.push_back(labels[s]);
    sh.rows += 1;
  }
  return {FederatedProblem::from_shards(spec.loss, spec.dim, std::move(shards)), std::move(planted)};
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// g_i(x): exact local gradient for FULL, otherwise the mean of B per-sample
/// gradients drawn uniformly with replacement. Quadratic clients are
/// deterministic for every B.
inline ParamVector stochastic_gradient(const FederatedProblem& prob, std::size_t client, const ParamVector& x,
                                       BatchSize batch, RngStream& rng) {
  if (batch.is_full() || prob.loss() == LossKind::HeteroQuadratic) return prob.client_gradient(client, x);
  const auto& s = prob.shard(client);
  const std::size_t b = *batch.count;
  ParamVector g(prob.dim());
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t r = rng.index(s.rows);
    prob.add_sample_gradient(g, s.row(r, prob.dim()), s.labels[r], x);
  }
  const double inv = 1.0 / static_cast<double>(b);
  for (auto& v : g) v *= inv;
  g.check_finite("stochastic_gradient");
  return g;
}

// (1/N) sum_i grad f_i(x), summed in ascending client order.
inline ParamVector full_global_gradient(const FederatedProblem& prob, const ParamVector& x) {
  ParamVector g(prob.dim());
  for (std::size_t i = 0; i < prob.num_clients(); ++i) {
    const auto gi = prob.client_gradient(i, x);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
  }
  const double inv = 1.0 / static_cast<double>(prob.num_clients());
  for (auto& v : g) v *= inv;
  g.check_finite("full_global_gradient");
  return g;
}

inline SmoothnessEstimate estimate_smoothness(const FederatedProblem& prob) { return prob.smoothness(); }

inline double smooth_value(const FederatedProblem& prob, const ParamVector& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.num_clients(); ++i) acc += prob.client_loss(i, x);
  return acc / static_cast<double>(prob.num_clients());
}

// F(x) = f(x) + h(x) on the full data.
inline double objective_value(const FederatedProblem& prob, const Regularizer& reg, const ParamVector& x) {
  const double v = smooth_value(prob, x) + reg.evaluate(x);
  require_finite_scalar(v, "objective_value");
  return v;
}

// Single-sample variance E||grad f(x; xi) - grad f_i(x)||^2 over client i's data.
inline double gradient_variance(const FederatedProblem& prob, std::size_t client, const ParamVector& x) {
  if (prob.loss() == LossKind::HeteroQuadratic) return 0.0;
  const auto mean = prob.client_gradient(client, x);
  const auto& s = prob.shard(client);
  double acc = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    ParamVector g(prob.dim());
    prob.add_sample_gradient(g, s.row(r, prob.dim()), s.labels[r], x);
    for (std::size_t j = 0; j < g.size(); ++j) acc += (g[j] - mean[j]) * (g[j] - mean[j]);
  }
  return acc / static_cast<double>(s.rows);
}

// ---------------------------------------------------------------------------
// CSV dump / load: "client,label,f0,...,f{p-1}" per sample.
// ---------------------------------------------------------------------------

inline void dump_dataset_csv(const FederatedProblem& prob, std::ostream& out) {
  if (prob.loss() == LossKind::HeteroQuadratic) {
    throw DomainError("dump_dataset_csv: quadratic problems have no samples");
  }
  out << "client,label";
  for (std::size_t j = 0; j < prob.dim(); ++j) out << ",f" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < prob.num_clients(); ++i) {
    const auto& s = prob.shard(i);
    for (std::size_t r = 0; r < s.rows; ++r) {
      out << i << ',' << s.labels[r];
      for (double a : s.row(r, prob.dim())) out << ',' << a;
      out << '\n';
    }
  }
}

inline FederatedProblem load_dataset_csv(std::istream& in, LossKind loss) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("load_dataset_csv: empty input");
  const auto header_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (header_cols < 3 || line.rfind("client,label", 0) != 0) {
    throw DomainError("load_dataset_csv: expected header 'client,label,f0,...'");
  }
  const std::size_t dim = header_cols - 2;
  std::vector<DataShard> shards;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() != header_cols) {
      throw DimensionError("load_dataset_csv: line " + std::to_string(lineno) + " has " +
                           std::to_string(cells.size()) + " columns");
    }
    const auto client = static_cast<std::size_t>(cells[0]);
    if (client >= shards.size()) shards.resize(client + 1);
    auto& sh = shards[client];
    sh.labels.push_back(cells[1]);
    sh.features.insert(sh.features.end(), cells.begin() + 2, cells.end());
    sh.rows += 1;
  }
  return FederatedProblem::from_shards(loss, dim, std::move(shards));
}

}  // namespace fedcef
