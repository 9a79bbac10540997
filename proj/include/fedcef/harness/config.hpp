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

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "fedcef/algorithms/state.hpp"
#include "fedcef/compressors.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/problems.hpp"
#include "fedcef/regularizers.hpp"

namespace fedcef::harness {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Algorithm { FedCef, ProxFedAvg, Pgd };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FedCef: return "fedcef";
    case Algorithm::ProxFedAvg: return "prox_fedavg";
    case Algorithm::Pgd: return "pgd";
  }
  return "?";
}

/// Everything needed to reproduce one run.
struct RunConfig {
  std::string preset = "cifar-like";
  SyntheticSpec problem;
  std::uint64_t problem_seed = 1;
  Algorithm algorithm = Algorithm::FedCef;
  HyperParams hyper;
  Regularizer regularizer = Regularizer::zero();
  CompressorSpec compressor = CompressorSpec::identity();
  std::uint64_t seed = 1;
  std::string output;
  bool lyapunov = true;
  bool transcripts = false;
};

/// Defaults for the two shipped presets. Both scale the image-classification
/// setups down to synthetic non-convex problems of a few dozen coordinates.
inline RunConfig preset_config(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  c.problem.loss = LossKind::SigmoidNonconvex;
  c.problem.clients = 10;
  c.regularizer = Regularizer::l1(1e-5);
  c.compressor = CompressorSpec::top_ratio(0.01);
  c.hyper.eta_g = 1.0;
  c.hyper.eta = 0.1;
  c.hyper.batch = BatchSize::of(64);
  if (name == "cifar-like") {
    c.problem.dim = 100;
    c.problem.samples = 4000;
    c.problem.partition = PartitionSpec::dirichlet(0.6);
    c.hyper.alpha = 0.06;
    c.hyper.K = 30;
    c.hyper.T = 400;
  } else if (name == "mnist-like") {
    c.problem.dim = 50;
    c.problem.samples = 2000;
    c.problem.partition = PartitionSpec::dirichlet(0.5);
    c.hyper.alpha = 0.1;
    c.hyper.K = 10;
    c.hyper.T = 65;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected cifar-like or mnist-like)");
  }
  return c;
}

namespace detail {

inline std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return "";
  return "line " + std::to_string(m.line + 1) + ": ";
}

template <typename T>
T scalar(const YAML::Node& n, std::string_view key) {
  if (!n.IsScalar()) throw ConfigError(where(n) + std::string(key) + " must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(n) + "invalid value '" + n.Scalar() + "' for " + std::string(key));
  }
}

inline void check_keys(const YAML::Node& map, std::string_view section, const std::set<std::string>& allowed) {
  if (!map.IsMap()) throw ConfigError(where(map) + std::string(section) + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(where(kv.first) + "unknown key '" + key + "' in " + std::string(section));
    }
  }
}

inline void require(bool ok, const YAML::Node& n, const std::string& msg) {
  if (!ok) throw ConfigError(where(n) + msg);
}

inline LossKind parse_loss(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "problem.loss");
  if (s == "squared") return LossKind::SquaredError;
  if (s == "logistic") return LossKind::Logistic;
  if (s == "sigmoid") return LossKind::SigmoidNonconvex;
  if (s == "hetero_quadratic") return LossKind::HeteroQuadratic;
  throw ConfigError(where(n) + "problem.loss must be squared, logistic, sigmoid or hetero_quadratic");
}

}  // namespace detail

/// Parses a YAML run configuration.
///
/// Omitted fields fall back to the preset (cifar-like unless `preset:` says
/// otherwise). Unknown keys and out-of-domain values raise ConfigError with
/// the offending line.
inline RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("malformed config: " + std::string(e.what()));
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  using detail::require;
  using detail::scalar;
  detail::check_keys(root, "config",
                     {"preset", "seed", "output", "problem", "algorithm", "hyper", "regularizer", "compressor",
                      "diagnostics"});

  RunConfig c = preset_config(root["preset"] ? scalar<std::string>(root["preset"], "preset") : "cifar-like");
  if (auto n = root["seed"]) c.seed = scalar<std::uint64_t>(n, "seed");
  if (auto n = root["output"]) c.output = scalar<std::string>(n, "output");

  if (auto p = root["problem"]; p && !p.IsNull()) {
    detail::check_keys(p, "problem",
                       {"loss", "dim", "samples", "clients", "partition", "alpha_d", "seed", "planted_density",
                        "label_noise", "curvature_lo", "curvature_hi", "center_lo", "center_hi"});
    auto& pr = c.problem;
    if (auto n = p["loss"]) pr.loss = detail::parse_loss(n);
    if (auto n = p["dim"]) {
      pr.dim = scalar<std::size_t>(n, "problem.dim");
      require(pr.dim >= 1, n, "problem.dim must be >= 1");
    }
    if (auto n = p["samples"]) pr.samples = scalar<std::size_t>(n, "problem.samples");
    if (auto n = p["clients"]) {
      pr.clients = scalar<std::size_t>(n, "problem.clients");
      require(pr.clients >= 1, n, "problem.clients must be >= 1");
    }
    if (auto n = p["partition"]) {
      const auto s = scalar<std::string>(n, "problem.partition");
      require(s == "iid" || s == "dirichlet", n, "problem.partition must be iid or dirichlet");
      pr.partition.mode = s == "iid" ? PartitionMode::IID : PartitionMode::Dirichlet;
    }
    if (auto n = p["alpha_d"]) {
      pr.partition.alpha_d = scalar<double>(n, "problem.alpha_d");
      require(pr.partition.alpha_d > 0.0, n, "problem.alpha_d must be > 0");
    }
    if (auto n = p["seed"]) c.problem_seed = scalar<std::uint64_t>(n, "problem.seed");
    if (auto n = p["planted_density"]) {
      pr.planted_density = scalar<double>(n, "problem.planted_density");
      require(pr.planted_density > 0.0 && pr.planted_density <= 1.0, n, "problem.planted_density must lie in (0, 1]");
    }
    if (auto n = p["label_noise"]) {
      pr.label_noise = scalar<double>(n, "problem.label_noise");
      require(pr.label_noise >= 0.0, n, "problem.label_noise must be >= 0");
    }
    if (auto n = p["curvature_lo"]) pr.spread.curvature_lo = scalar<double>(n, "problem.curvature_lo");
    if (auto n = p["curvature_hi"]) pr.spread.curvature_hi = scalar<double>(n, "problem.curvature_hi");
    if (auto n = p["center_lo"]) pr.spread.center_lo = scalar<double>(n, "problem.center_lo");
    if (auto n = p["center_hi"]) pr.spread.center_hi = scalar<double>(n, "problem.center_hi");
    require(pr.spread.curvature_lo > 0.0 && pr.spread.curvature_hi >= pr.spread.curvature_lo, p,
            "problem curvature range must satisfy 0 < curvature_lo <= curvature_hi");
    require(pr.spread.center_hi >= pr.spread.center_lo, p, "problem center range must satisfy center_lo <= center_hi");
  }
  if (c.problem.loss != LossKind::HeteroQuadratic && c.problem.samples < c.problem.clients) {
    throw ConfigError("problem.samples must be >= problem.clients");
  }

  if (auto n = root["algorithm"]) {
    const auto s = scalar<std::string>(n, "algorithm");
    if (s == "fedcef") c.algorithm = Algorithm::FedCef;
    else if (s == "prox_fedavg") c.algorithm = Algorithm::ProxFedAvg;
    else if (s == "pgd") c.algorithm = Algorithm::Pgd;
    else throw ConfigError(detail::where(n) + "algorithm must be fedcef, prox_fedavg or pgd");
  }

  if (auto h = root["hyper"]; h && !h.IsNull()) {
    detail::check_keys(h, "hyper", {"alpha", "eta_g", "K", "eta", "B", "T"});
    auto& hp = c.hyper;
    if (auto n = h["alpha"]) {
      hp.alpha = scalar<double>(n, "hyper.alpha");
      require(hp.alpha > 0.0, n, "hyper.alpha must be > 0");
    }
    if (auto n = h["eta_g"]) {
      hp.eta_g = scalar<double>(n, "hyper.eta_g");
      require(hp.eta_g > 0.0, n, "hyper.eta_g must be > 0");
    }
    if (auto n = h["K"]) {
      const auto k = scalar<long long>(n, "hyper.K");
      require(k >= 1, n, "hyper.K must be >= 1");
      hp.K = static_cast<int>(k);
    }
    if (auto n = h["eta"]) {
      hp.eta = scalar<double>(n, "hyper.eta");
      require(hp.eta > 0.0 && hp.eta <= 1.0, n, "hyper.eta must lie in (0, 1]");
    }
    if (auto n = h["B"]) {
      const auto s = scalar<std::string>(n, "hyper.B");
      if (s == "full" || s == "FULL") {
        hp.batch = BatchSize::full();
      } else {
        const auto b = scalar<long long>(n, "hyper.B");
        require(b >= 1, n, "hyper.B must be >= 1 or 'full'");
        hp.batch = BatchSize::of(static_cast<std::size_t>(b));
      }
    }
    if (auto n = h["T"]) {
      const auto t = scalar<long long>(n, "hyper.T");
      require(t >= 1, n, "hyper.T must be >= 1");
      hp.T = static_cast<int>(t);
    }
  }

  if (auto r = root["regularizer"]; r && !r.IsNull()) {
    detail::check_keys(r, "regularizer", {"kind", "lambda"});
    std::string kind(to_string(c.regularizer.kind()));
    double lambda = c.regularizer.lambda();
    if (auto n = r["kind"]) kind = scalar<std::string>(n, "regularizer.kind");
    if (auto n = r["lambda"]) {
      lambda = scalar<double>(n, "regularizer.lambda");
      require(lambda >= 0.0, n, "regularizer.lambda must be >= 0");
    }
    if (kind == "zero") c.regularizer = Regularizer::zero();
    else if (kind == "l1") c.regularizer = Regularizer::l1(lambda);
    else throw ConfigError(detail::where(r) + "regularizer.kind must be zero or l1");
  }

  if (auto s = root["compressor"]; s && !s.IsNull()) {
    detail::check_keys(s, "compressor", {"kind", "retain"});
    if (auto n = s["kind"]) {
      const auto k = scalar<std::string>(n, "compressor.kind");
      if (k == "identity") c.compressor.kind = CompressorKind::Identity;
      else if (k == "topk") c.compressor.kind = CompressorKind::TopK;
      else if (k == "randk") c.compressor.kind = CompressorKind::RandK;
      else throw ConfigError(detail::where(n) + "compressor.kind must be identity, topk or randk");
    }
    // An integer literal is an element count; anything with a '.' or exponent is a ratio.
    if (auto n = s["retain"]) {
      const auto raw = scalar<std::string>(n, "compressor.retain");
      if (raw.find_first_of(".eE") == std::string::npos) {
        const auto k = scalar<long long>(n, "compressor.retain");
        require(k >= 1, n, "compressor.retain count must be >= 1");
        c.compressor.retain = RetainCount{static_cast<std::size_t>(k)};
      } else {
        const auto r = scalar<double>(n, "compressor.retain");
        require(r > 0.0 && r <= 1.0, n, "compressor.retain ratio must lie in (0, 1]");
        c.compressor.retain = RetainRatio{r};
      }
    }
  }
  if (c.compressor.kind != CompressorKind::Identity) {
    if (const auto* k = std::get_if<RetainCount>(&c.compressor.retain); k && k->k > c.problem.dim) {
      throw ConfigError("compressor.retain count exceeds problem.dim");
    }
  }

  if (auto d = root["diagnostics"]; d && !d.IsNull()) {
    detail::check_keys(d, "diagnostics", {"lyapunov", "transcripts"});
    if (auto n = d["lyapunov"]) c.lyapunov = scalar<bool>(n, "diagnostics.lyapunov");
    if (auto n = d["transcripts"]) c.transcripts = scalar<bool>(n, "diagnostics.transcripts");
  }
  return c;
}

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  auto s = os.str();
  // Keep floats recognizable as floats (matters for compressor.retain).
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

/// Canonical YAML for a config; parse_config(to_yaml(c)) reproduces c.
inline std::string to_yaml(const RunConfig& c) {
  using detail::num;
  std::ostringstream os;
  const auto& pr = c.problem;
  os << "preset: " << c.preset << "\n";
  os << "seed: " << c.seed << "\n";
  if (!c.output.empty()) os << "output: \"" << c.output << "\"\n";
  os << "algorithm: " << to_string(c.algorithm) << "\n";
  os << "problem:\n"
     << "  loss: " << to_string(pr.loss) << "\n"
     << "  dim: " << pr.dim << "\n"
     << "  samples: " << pr.samples << "\n"
     << "  clients: " << pr.clients << "\n"
     << "  partition: " << (pr.partition.mode == PartitionMode::IID ? "iid" : "dirichlet") << "\n"
     << "  alpha_d: " << num(pr.partition.alpha_d) << "\n"
     << "  seed: " << c.problem_seed << "\n"
     << "  planted_density: " << num(pr.planted_density) << "\n"
     << "  label_noise: " << num(pr.label_noise) << "\n"
     << "  curvature_lo: " << num(pr.spread.curvature_lo) << "\n"
     << "  curvature_hi: " << num(pr.spread.curvature_hi) << "\n"
     << "  center_lo: " << num(pr.spread.center_lo) << "\n"
     << "  center_hi: " << num(pr.spread.center_hi) << "\n";
  const auto& hp = c.hyper;
  os << "hyper:\n"
     << "  alpha: " << num(hp.alpha) << "\n"
     << "  eta_g: " << num(hp.eta_g) << "\n"
     << "  K: " << hp.K << "\n"
     << "  eta: " << num(hp.eta) << "\n"
     << "  B: " << (hp.batch.is_full() ? std::string("full") : std::to_string(*hp.batch.count)) << "\n"
     << "  T: " << hp.T << "\n";
  os << "regularizer:\n"
     << "  kind: " << to_string(c.regularizer.kind()) << "\n"
     << "  lambda: " << num(c.regularizer.lambda()) << "\n";
  os << "compressor:\n"
     << "  kind: " << to_string(c.compressor.kind) << "\n";
  if (const auto* k = std::get_if<RetainCount>(&c.compressor.retain)) {
    os << "  retain: " << k->k << "\n";
  } else {
    os << "  retain: " << num(std::get<RetainRatio>(c.compressor.retain).r) << "\n";
  }
  os << "diagnostics:\n"
     << "  lyapunov: " << (c.lyapunov ? "true" : "false") << "\n"
     << "  transcripts: " << (c.transcripts ? "true" : "false") << "\n";
  return os.str();
}

/// Returns `text` with the dotted key (e.g. "compressor.retain") set to the
/// scalar `value`. Intermediate maps are created as needed.
inline std::string with_override(const std::string& text, const std::string& dotted_key, const std::string& value) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("malformed config: " + std::string(e.what()));
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  std::vector<std::string> parts;
  std::stringstream ss(dotted_key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("invalid dotted key '" + dotted_key + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty dotted key");
  std::function<void(YAML::Node, std::size_t)> set = [&](YAML::Node node, std::size_t i) {
    if (i + 1 == parts.size()) {
      node[parts[i]] = value;
      return;
    }
    YAML::Node child = node[parts[i]];
    if (!child || child.IsNull()) {
      node[parts[i]] = YAML::Node(YAML::NodeType::Map);
      child = node[parts[i]];
    }
    set(child, i + 1);
  };
  set(root, 0);
  YAML::Emitter out;
  out << root;
  return out.c_str();
}

}  // namespace fedcef::harness
