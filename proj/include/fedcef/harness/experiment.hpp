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

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedcef/algorithms/baselines.hpp"
#include "fedcef/algorithms/fedcef.hpp"
#include "fedcef/core/rng.hpp"
#include "fedcef/harness/config.hpp"
#include "fedcef/harness/csv.hpp"
#include "fedcef/problems.hpp"

namespace fedcef::harness {

inline FederatedProblem build_problem(const RunConfig& cfg) {
  RngStream rng(cfg.problem_seed, "problem");
  return generate_synthetic(cfg.problem, rng).problem;
}

/// Builds the problem and runs the configured algorithm. Notices go to `log`.
inline MetricsSeries run_series(const RunConfig& cfg, std::ostream& log) {
  const auto prob = build_problem(cfg);
  switch (cfg.algorithm) {
    case Algorithm::FedCef: {
      RunOptions opts;
      opts.lyapunov = cfg.lyapunov;
      opts.keep_transcripts = cfg.transcripts;
      return run_fedcef(prob, cfg.regularizer, cfg.hyper, cfg.compressor, cfg.seed, opts);
    }
    case Algorithm::ProxFedAvg: {
      RunOptions opts;
      opts.keep_transcripts = cfg.transcripts;
      return run_prox_fedavg(prob, cfg.regularizer, cfg.hyper, cfg.seed, opts);
    }
    case Algorithm::Pgd: {
      log << "notice: algorithm=pgd ignores the compressor section; step = alpha * eta_g * K\n";
      cfg.hyper.validate();
      const double step = cfg.hyper.beta();
      return pgd_metrics(prob, cfg.regularizer, step, run_centralized_pgd(prob, cfg.regularizer, step, cfg.hyper.T));
    }
  }
  throw ConfigError("unknown algorithm");
}

/// Runs one experiment and writes its CSV to `out_path`. Returns the process
/// exit status; errors are reported on `err`.
inline int run_experiment(const RunConfig& cfg, const std::filesystem::path& out_path, std::ostream& err) {
  try {
    const auto series = run_series(cfg, err);
    for (const auto& w : series.warnings) err << "warning: " << w << "\n";
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + out_path.string());
    write_metrics_csv(out, cfg, series);
    if (!out) throw Error("failed writing " + out_path.string());
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline std::string sweep_file_name(const std::string& key, const std::string& value) {
  std::string name = key + "=" + value;
  for (auto& ch : name) {
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  }
  return name + ".csv";
}

/// Runs the base config once per value of `key`, one CSV per value in
/// `out_dir`. Returns the first nonzero exit status, or 0.
inline int run_sweep(const std::string& config_text, const std::string& key, const std::vector<std::string>& values,
                     const std::filesystem::path& out_dir, std::ostream& err) {
  int status = 0;
  for (const auto& v : values) {
    RunConfig cfg;
    try {
      cfg = parse_config(with_override(config_text, key, v));
    } catch (const std::exception& e) {
      err << "error: " << key << "=" << v << ": " << e.what() << "\n";
      if (status == 0) status = 1;
      continue;
    }
    const int rc = run_experiment(cfg, out_dir / sweep_file_name(key, v), err);
    if (rc != 0 && status == 0) status = rc;
  }
  return status;
}

}  // namespace fedcef::harness
