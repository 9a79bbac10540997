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
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedcef/harness/csv.hpp"

namespace fedcef::harness {

struct AlignedPoint {
  std::uint64_t bytes = 0;  // cumulative uplink + downlink
  double objective = 0.0;
  double prox_grad_sq = 0.0;
};

struct RunSummary {
  std::vector<AlignedPoint> points;
  double final_objective = 0.0;
  double best_objective = 0.0;
  double final_prox_grad_sq = 0.0;
  std::uint64_t final_uplink = 0;
  std::uint64_t final_downlink = 0;
  // First row with F <= threshold, if any.
  std::optional<int> round_to_threshold;
  std::optional<std::uint64_t> bytes_to_threshold;
  std::optional<std::uint64_t> uplink_to_threshold;

  [[nodiscard]] std::uint64_t final_total() const noexcept { return final_uplink + final_downlink; }
};

struct CompareSummary {
  RunSummary a;
  RunSummary b;
  double uplink_savings = 0.0;  // 1 - uplink_b / uplink_a over the whole run
  double total_savings = 0.0;
  double objective_gap = 0.0;   // |F_b - F_a| / |F_a| at the final round
  std::optional<double> threshold;
  std::optional<double> threshold_savings;  // on total bytes, when both runs reach it
};

inline RunSummary summarize(const MetricsCsv& csv, std::optional<double> threshold) {
  if (csv.rows.empty()) throw CsvError("run has no metric rows");
  RunSummary s;
  s.best_objective = csv.rows.front().objective;
  for (const auto& r : csv.rows) {
    const auto bytes = r.uplink_bytes_cum + r.downlink_bytes_cum;
    s.points.push_back({bytes, r.objective, r.prox_grad_sq});
    s.best_objective = std::min(s.best_objective, r.objective);
    if (threshold && !s.round_to_threshold && r.objective <= *threshold) {
      s.round_to_threshold = r.t;
      s.bytes_to_threshold = bytes;
      s.uplink_to_threshold = r.uplink_bytes_cum;
    }
  }
  const auto& last = csv.rows.back();
  s.final_objective = last.objective;
  s.final_prox_grad_sq = last.prox_grad_sq;
  s.final_uplink = last.uplink_bytes_cum;
  s.final_downlink = last.downlink_bytes_cum;
  return s;
}

namespace detail {

inline double savings(std::uint64_t a, std::uint64_t b) {
  if (a == 0) return 0.0;
  return 1.0 - static_cast<double>(b) / static_cast<double>(a);
}

inline bool tagged(const MetricsCsv& csv) {
  return !csv.header.empty() && csv.header.front() == kCsvMagic;
}

}  // namespace detail

/// Lines two runs up on the cumulative-bytes axis and reports byte savings of
/// b relative to a, overall and to reach an objective threshold.
inline CompareSummary compare_runs(const MetricsCsv& a, const MetricsCsv& b, std::optional<double> threshold) {
  if (!detail::tagged(a) || !detail::tagged(b)) {
    throw CsvError("schema mismatch: both inputs must start with '" + std::string(kCsvMagic) + "'");
  }
  CompareSummary c;
  c.a = summarize(a, threshold);
  c.b = summarize(b, threshold);
  c.threshold = threshold;
  c.uplink_savings = detail::savings(c.a.final_uplink, c.b.final_uplink);
  c.total_savings = detail::savings(c.a.final_total(), c.b.final_total());
  c.objective_gap = std::abs(c.b.final_objective - c.a.final_objective) / std::max(std::abs(c.a.final_objective), 1e-300);
  if (c.a.bytes_to_threshold && c.b.bytes_to_threshold) {
    c.threshold_savings = detail::savings(*c.a.bytes_to_threshold, *c.b.bytes_to_threshold);
  }
  return c;
}

inline void print_comparison(std::ostream& out, const CompareSummary& c) {
  out << std::setprecision(6);
  out << "run,final_F,best_F,final_prox_grad_sq,uplink_bytes,downlink_bytes,round_to_threshold,bytes_to_threshold\n";
  auto row = [&](const char* name, const RunSummary& s) {
    out << name << ',' << s.final_objective << ',' << s.best_objective << ',' << s.final_prox_grad_sq << ','
        << s.final_uplink << ',' << s.final_downlink << ',';
    if (s.round_to_threshold) {
      out << *s.round_to_threshold << ',' << *s.bytes_to_threshold;
    } else {
      out << "not reached,not reached";
    }
    out << '\n';
  };
  row("a", c.a);
  row("b", c.b);
  out << "uplink_savings," << c.uplink_savings << "\n";
  out << "total_savings," << c.total_savings << "\n";
  out << "final_objective_gap," << c.objective_gap << "\n";
  if (c.threshold) {
    out << "threshold," << *c.threshold << "\n";
    out << "threshold_savings,";
    if (c.threshold_savings) out << *c.threshold_savings;
    else out << "not reached";
    out << "\n";
  }
  out << "# aligned: run,bytes,F,prox_grad_sq\n";
  auto dump = [&](const char* name, const RunSummary& s) {
    for (const auto& p : s.points) out << name << ',' << p.bytes << ',' << p.objective << ',' << p.prox_grad_sq << '\n';
  };
  dump("a", c.a);
  dump("b", c.b);
}

}  // namespace fedcef::harness
