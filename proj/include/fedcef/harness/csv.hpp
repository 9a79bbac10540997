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
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedcef/algorithms/fedcef.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/harness/config.hpp"
#include "fedcef/metrics.hpp"

namespace fedcef::harness {

inline constexpr std::string_view kCsvMagic = "# fedcef-metrics v1";
inline constexpr std::string_view kCsvColumns =
    "t,F,prox_grad_sq,uplink_bytes_cum,downlink_bytes_cum,nnz,lyapunov,condition_ok";

class CsvError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string g17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// Writes the header block (format tag, config echo, L, step conditions,
/// warnings) followed by one line per MetricsRow. Doubles carry 17
/// significant digits so they read back bit-exact.
inline void write_metrics_csv(std::ostream& out, const RunConfig& cfg, const MetricsSeries& series) {
  out << kCsvMagic << "\n";
  out << "# config:\n";
  std::istringstream yaml(to_yaml(cfg));
  for (std::string line; std::getline(yaml, line);) out << "#   " << line << "\n";
  out << "# smoothness_L: " << detail::g17(series.smoothness) << "\n";
  out << "# q: " << detail::g17(series.q) << "\n";
  const auto& c = series.conditions;
  out << "# step_conditions: beta=" << detail::g17(cfg.hyper.beta()) << " beta_bound=" << detail::g17(c.beta_bound)
      << " beta_ok=" << c.beta_ok << " eta_g_bound=" << detail::g17(c.eta_g_bound) << " eta_g_ok=" << c.eta_g_ok
      << " alpha_bound=" << detail::g17(c.alpha_local_bound) << " alpha_ok=" << c.alpha_ok << "\n";
  for (const auto& w : series.warnings) out << "# warning: " << w << "\n";
  out << kCsvColumns << "\n";
  for (const auto& r : series.rows) {
    out << r.t << ',' << detail::g17(r.objective) << ',' << detail::g17(r.prox_grad_sq) << ',' << r.uplink_bytes_cum
        << ',' << r.downlink_bytes_cum << ',' << r.nnz << ',' << (r.lyapunov ? detail::g17(*r.lyapunov) : "") << ','
        << (r.condition_ok ? 1 : 0) << "\n";
  }
}

struct MetricsCsv {
  std::vector<std::string> header;  // comment lines, '#' included
  std::vector<MetricsRow> rows;
};

inline MetricsCsv read_metrics_csv(std::istream& in) {
  MetricsCsv out;
  std::string line;
  std::size_t lineno = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      out.header.push_back(line);
      continue;
    }
    if (!have_columns) {
      if (line != kCsvColumns) {
        throw CsvError("line " + std::to_string(lineno) + ": unexpected column header '" + line + "'");
      }
      have_columns = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) {
      throw CsvError("line " + std::to_string(lineno) + ": expected 8 columns, got " + std::to_string(cells.size()));
    }
    try {
      MetricsRow r;
      r.t = std::stoi(cells[0]);
      r.objective = std::strtod(cells[1].c_str(), nullptr);
      r.prox_grad_sq = std::strtod(cells[2].c_str(), nullptr);
      r.uplink_bytes_cum = std::stoull(cells[3]);
      r.downlink_bytes_cum = std::stoull(cells[4]);
      r.nnz = std::stoull(cells[5]);
      if (!cells[6].empty()) r.lyapunov = std::strtod(cells[6].c_str(), nullptr);
      r.condition_ok = cells[7] == "1";
      out.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw CsvError("line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!have_columns) throw CsvError("missing column header '" + std::string(kCsvColumns) + "'");
  return out;
}

// Recovers the echoed YAML config from a CSV header.
inline std::string config_from_header(const std::vector<std::string>& header) {
  std::string yaml;
  bool inside = false;
  for (const auto& line : header) {
    if (line == "# config:") {
      inside = true;
      continue;
    }
    if (inside) {
      if (line.rfind("#   ", 0) != 0) break;
      yaml += line.substr(4) + "\n";
    }
  }
  if (yaml.empty()) throw CsvError("no config echo found in CSV header");
  return yaml;
}

}  // namespace fedcef::harness
