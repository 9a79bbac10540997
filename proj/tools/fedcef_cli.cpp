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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedcef/harness/compare.hpp"
#include "fedcef/harness/config.hpp"
#include "fedcef/harness/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fedcef::Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fedcef::harness::MetricsCsv load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fedcef::Error("cannot read " + path);
  return fedcef::harness::read_metrics_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed proximal federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a single configuration and write its metrics CSV");
  run->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_option("--seed", seed, "Override the algorithm seed");

  std::string sweep_key;
  std::vector<std::string> sweep_values;
  std::string out_dir;
  auto* sweep = app.add_subcommand("sweep", "Vary one config key over a list of values");
  sweep->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--key", sweep_key, "Dotted key, e.g. compressor.retain")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--out-dir", out_dir, "Directory for per-value CSVs")->required();

  std::string csv_a;
  std::string csv_b;
  std::optional<double> threshold;
  auto* compare = app.add_subcommand("compare", "Compare two metrics CSVs on the bytes axis");
  compare->add_option("a", csv_a, "Baseline CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("b", csv_b, "Candidate CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--threshold", threshold, "Objective threshold for bytes-to-reach");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = fedcef::harness::parse_config(slurp(config_path));
      if (seed) cfg.seed = *seed;
      return fedcef::harness::run_experiment(cfg, out_path, std::cerr);
    }
    if (*sweep) {
      return fedcef::harness::run_sweep(slurp(config_path), sweep_key, sweep_values, out_dir, std::cerr);
    }
    if (*compare) {
      const auto summary = fedcef::harness::compare_runs(load_csv(csv_a), load_csv(csv_b), threshold);
      fedcef::harness::print_comparison(std::cout, summary);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
