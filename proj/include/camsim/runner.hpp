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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "camsim/config.hpp"
#include "camsim/report.hpp"
#include "camsim/version.hpp"

namespace camsim {

struct RunOptions {
  int jobs = 1;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  std::ostream* log = &std::cout;
};

namespace detail {

inline void write_manifest(const std::filesystem::path& dir,
                           const ExperimentConfig& cfg,
                           const RunOptions& options,
                           const std::string& status,
                           const std::vector<std::string>& artifacts) {
  Json m;
  m["tool"] = "camsim";
  m["version"] = kVersion;
  m["status"] = status;
  m["config"] = cfg.resolved();
  m["jobs"] = options.jobs;
  m["trace"] = options.trace;
  m["artifacts"] = artifacts;
  std::ofstream out(dir / "run_manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write run_manifest.json");
  out << m.dump(2) << "\n";
}

inline void maybe_dump_traces(const ExperimentConfig& cfg,
                              const RunOptions& options,
                              const std::filesystem::path& dir,
                              std::vector<std::string>& artifacts) {
  if (!options.trace) return;
  // One sense-node trace per swept HDist (trial 0), enough for waveform
  // inspection without flooding the output directory.
  SimulationSettings sim = cfg.simulation;
  sim.trace = TraceMode::SenseNodes;
  const CellTechnology tech = cfg.technology.make();
  for (int h : cfg.study.hdist_set) {
    const BitVector query =
        detail::make_query(cfg.array.cols, cfg.study.seed, h, 0);
    CircuitNetwork net(cfg.array, tech,
                       detail::make_stored(query, cfg.array.rows, h,
                                           cfg.study.placement, cfg.study.seed,
                                           0),
                       query);
    const TransientResult result = simulate_search(net, sim);
    const std::string name = "trace_h" + std::to_string(h) + ".csv";
    write_trace_csv((dir / name).string(), *result.trace);
    artifacts.push_back(name);
  }
}

}  // namespace detail

/// Execute the configured study and write all artifacts. Returns the paths of
/// the files written (relative to the output directory).
inline std::vector<std::string> run_study(ExperimentConfig cfg,
                                          const RunOptions& options = {}) {
  if (options.seed) cfg.study.seed = *options.seed;
  if (options.output_dir) cfg.output_dir = *options.output_dir;
  cfg.validate();

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  std::vector<std::string> artifacts = {"run_manifest.json"};
  detail::write_manifest(dir, cfg, options, "running", artifacts);

  // Every run emits the full artifact set; studies that do not produce a
  // given table leave it header-only.
  std::vector<std::pair<std::optional<double>, MddReport>> mdd_groups;
  std::vector<std::pair<std::optional<double>, std::vector<DelayPopulation>>>
      pop_groups;
  std::vector<ComparisonRow> comparison;

  const CornerMode corner = cfg.study.resolved_corner_mode();
  switch (cfg.study.kind) {
    case StudyKind::Sweep: {
      std::vector<double> rrefs = cfg.study.rref_sweep_ohm;
      if (rrefs.empty()) rrefs.push_back(cfg.technology.rref_ohm);
      const bool multi = rrefs.size() > 1;
      for (double rref : rrefs) {
        const CellTechnology tech =
            cfg.technology.make(cfg.technology.kind, rref);
        SweepOptions opts;
        opts.placement = cfg.study.placement;
        opts.seed = cfg.study.seed;
        opts.jobs = options.jobs;
        std::vector<DelayPopulation> pops = sweep_hdist(
            cfg.array, tech, cfg.simulation, cfg.study.hdist_set, opts);
        std::optional<double> tag;
        if (multi) tag = rref;
        int statistical = 0;
        for (const DelayPopulation& p : pops) statistical += p.statistical();
        if (statistical >= 2) {
          mdd_groups.emplace_back(tag, compute_mdd(pops, corner));
        }
        pop_groups.emplace_back(tag, std::move(pops));
      }
      break;
    }
    case StudyKind::MonteCarlo: {
      MonteCarloOptions opts;
      opts.n_trials = cfg.study.n_trials;
      opts.sigmas = cfg.study.sigmas;
      opts.seed = cfg.study.seed;
      opts.placement = cfg.study.placement;
      opts.row_strategy = cfg.study.mc_row_strategy;
      opts.fixed_row = cfg.study.mc_fixed_row;
      opts.jobs = options.jobs;
      std::vector<DelayPopulation> pops =
          monte_carlo_study(cfg.array, cfg.technology.make(), cfg.simulation,
                            cfg.study.hdist_set, opts);
      int statistical = 0;
      for (const DelayPopulation& p : pops) statistical += p.statistical();
      if (statistical >= 2) {
        mdd_groups.emplace_back(std::nullopt, compute_mdd(pops, corner));
      }
      pop_groups.emplace_back(std::nullopt, std::move(pops));
      break;
    }
    case StudyKind::Compare: {
      std::vector<DesignSpec> designs;
      for (const DesignConfig& d : cfg.study.designs) {
        DesignSpec spec;
        spec.name = d.name;
        spec.tech = cfg.technology.make(d.kind, d.rref_ohm);
        spec.scheme = d.scheme;
        spec.precharge_hold_s = d.precharge_hold_s;
        designs.push_back(std::move(spec));
      }
      SweepOptions opts;
      opts.placement = cfg.study.placement;
      opts.seed = cfg.study.seed;
      opts.jobs = options.jobs;
      comparison = compare_designs(cfg.array, designs, cfg.simulation,
                                   cfg.study.reference_hdist, opts);
      break;
    }
    case StudyKind::TlmFit: {
      const TlmDataset data =
          load_tlm_csv(cfg.study.tlm_csv, cfg.study.tlm_width_um);
      const FilmExtraction fit = tlm_fit(data);
      Json j = {{"sheet_resistance_ohm_sq", fit.sheet_resistance_ohm_sq},
                {"contact_resistance_ohm", fit.contact_resistance_ohm},
                {"fit_residual_ohm", fit.fit_residual_ohm},
                {"intercept_clamped", fit.intercept_clamped},
                {"clamp_adjustment_ohm", fit.clamp_adjustment_ohm},
                {"points", data.points.size()},
                {"width_um", data.width_um}};
      std::ofstream out(dir / "tlm_extraction.json", std::ios::binary);
      out << j.dump(2) << "\n";
      artifacts.push_back("tlm_extraction.json");
      if (options.log != nullptr) {
        (*options.log) << "sheet resistance " << fit.sheet_resistance_ohm_sq
                       << " ohm/sq (rms residual " << fit.fit_residual_ohm
                       << " ohm), contact resistance "
                       << fit.contact_resistance_ohm << " ohm\n";
      }
      break;
    }
  }

  write_mdd_report_csv((dir / "mdd_report.csv").string(), mdd_groups);
  write_delay_populations_csv((dir / "delay_populations.csv").string(),
                              pop_groups);
  write_comparison_csv((dir / "comparison.csv").string(), comparison);
  artifacts.push_back("mdd_report.csv");
  artifacts.push_back("delay_populations.csv");
  artifacts.push_back("comparison.csv");

  if (cfg.study.kind == StudyKind::Sweep ||
      cfg.study.kind == StudyKind::MonteCarlo) {
    detail::maybe_dump_traces(cfg, options, dir, artifacts);
  }

  detail::write_manifest(dir, cfg, options, "complete", artifacts);
  return artifacts;
}

}  // namespace camsim
