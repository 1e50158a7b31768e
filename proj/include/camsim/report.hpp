// Copyright 2026 The camsim Authors
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

#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "camsim/analysis.hpp"

namespace camsim {

namespace detail {

/// Fixed scientific formatting so identical runs produce identical bytes.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace detail

/// mdd_report.csv: one row per HDist. When several reference resistances are
/// swept in one run, a leading rref_ohm column disambiguates them.
inline void write_mdd_report_csv(
    const std::string& path,
    const std::vector<std::pair<std::optional<double>, MddReport>>& reports) {
  std::ofstream out = detail::open_out(path);
  const bool multi = reports.size() > 1;
  out << (multi ? "rref_ohm,hdist,mdd,corner_mode\n"
                : "hdist,mdd,corner_mode\n");
  for (const auto& [rref, report] : reports) {
    const char* mode =
        report.mode == CornerMode::MinMax ? "min_max" : "three_sigma";
    for (const MddEntry& e : report.per_hdist) {
      if (multi) out << detail::fmt_double(rref.value_or(0.0)) << ",";
      out << e.hdist << ",";
      if (e.mdd) {
        out << *e.mdd;
      } else {
        out << "unresolvable";
      }
      out << "," << mode << "\n";
    }
  }
}

inline void write_mdd_report_csv(const std::string& path,
                                 const MddReport& report) {
  write_mdd_report_csv(path, {{std::nullopt, report}});
}

/// delay_populations.csv: every observed sample; rows that never discharged
/// (or ran past t_max) appear with delay_s = nan.
inline void write_delay_populations_csv(
    const std::string& path,
    const std::vector<std::pair<std::optional<double>,
                                std::vector<DelayPopulation>>>& groups) {
  std::ofstream out = detail::open_out(path);
  const bool multi = groups.size() > 1;
  out << (multi ? "rref_ohm,hdist,trial,row_position,delay_s\n"
                : "hdist,trial,row_position,delay_s\n");
  for (const auto& [rref, populations] : groups) {
    for (const DelayPopulation& pop : populations) {
      auto prefix = [&]() -> std::ofstream& {
        if (multi) out << detail::fmt_double(rref.value_or(0.0)) << ",";
        return out;
      };
      for (std::size_t k = 0; k < pop.samples.size(); ++k) {
        prefix() << pop.hdist << "," << pop.origins[k].first << ","
                 << pop.origins[k].second << ","
                 << detail::fmt_double(pop.samples[k]) << "\n";
      }
      for (const auto& [trial, row] : pop.no_discharge_origins) {
        prefix() << pop.hdist << "," << trial << "," << row << ",nan\n";
      }
      for (const auto& [trial, row] : pop.incomplete_origins) {
        prefix() << pop.hdist << "," << trial << "," << row << ",nan\n";
      }
    }
  }
}

inline void write_delay_populations_csv(
    const std::string& path, const std::vector<DelayPopulation>& populations) {
  write_delay_populations_csv(path, {{std::nullopt, populations}});
}

/// comparison.csv: per-design delay/energy with ratios against the first row.
inline void write_comparison_csv(const std::string& path,
                                 const std::vector<ComparisonRow>& rows) {
  std::ofstream out = detail::open_out(path);
  out << "design,delay_s,energy_j,delay_ratio,energy_ratio\n";
  for (const ComparisonRow& r : rows) {
    out << r.name << "," << detail::fmt_double(r.delay_s) << ","
        << detail::fmt_double(r.energy_j) << ","
        << detail::fmt_double(r.delay_ratio) << ","
        << detail::fmt_double(r.energy_ratio) << "\n";
  }
}

/// Long-format voltage trace dump.
inline void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out = detail::open_out(path);
  out << "time_s,node_id,voltage_v\n";
  for (std::size_t n = 0; n < trace.nodes.size(); ++n) {
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      out << detail::fmt_double(trace.times[k]) << "," << trace.labels[n]
          << "," << detail::fmt_double(trace.samples[k][n]) << "\n";
    }
  }
}

}  // namespace camsim
