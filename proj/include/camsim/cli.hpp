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

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "camsim/runner.hpp"

namespace camsim::cli {

namespace detail {

inline int fail(std::ostream& err, const std::string& type,
                const std::string& message, int code) {
  Json j;
  j["error"] = {{"type", type}, {"message", message}};
  err << j.dump(2) << "\n";
  return code;
}

}  // namespace detail

/// Entry point shared by the camsim binary and the in-process CLI tests.
inline int run(int argc, const char* const* argv,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"matchline-discharge CAM array simulator"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  options.log = &out;
  std::uint64_t seed_override = 0;
  std::string output_dir_override;

  CLI::App* cmd_run = app.add_subcommand("run", "execute a study config");
  cmd_run->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  cmd_run->add_option("--jobs", options.jobs, "parallel work items")
      ->check(CLI::PositiveNumber);
  CLI::Option* opt_out =
      cmd_run->add_option("--output-dir", output_dir_override,
                          "override config output directory");
  CLI::Option* opt_seed =
      cmd_run->add_option("--seed", seed_override, "override study seed");
  cmd_run->add_flag("--trace", options.trace, "dump voltage trace CSVs");

  std::string tlm_csv;
  double width_um = kTlmReferenceWidthUm;
  std::string tlm_json_out;
  CLI::App* cmd_tlm = app.add_subcommand(
      "tlm-fit", "extract sheet/contact resistance from TLM data");
  cmd_tlm->add_option("csv", tlm_csv, "CSV with header spacing_um,resistance_ohm")
      ->required();
  cmd_tlm->add_option("--width-um", width_um, "test structure width (um)")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_tlm->add_option("--json", tlm_json_out, "also write the fit as JSON");

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "check a config without running it");
  cmd_validate->add_option("config", config_path, "experiment config (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends print through CLI11 already.
      std::stringstream ss;
      const int code = app.exit(e, ss, ss);
      out << ss.str();
      return code;
    }
    return detail::fail(err, "usage", e.what(), 2);
  }

  try {
    if (cmd_run->parsed()) {
      if (*opt_seed) options.seed = seed_override;
      if (*opt_out) options.output_dir = output_dir_override;
      const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
      run_study(cfg, options);
      return 0;
    }
    if (cmd_tlm->parsed()) {
      const TlmDataset data = load_tlm_csv(tlm_csv, width_um);
      const FilmExtraction fit = tlm_fit(data);
      out << "sheet resistance " << fit.sheet_resistance_ohm_sq
          << " ohm/sq (rms residual " << fit.fit_residual_ohm
          << " ohm), contact resistance " << fit.contact_resistance_ohm
          << " ohm\n";
      if (!tlm_json_out.empty()) {
        Json j = {{"sheet_resistance_ohm_sq", fit.sheet_resistance_ohm_sq},
                  {"contact_resistance_ohm", fit.contact_resistance_ohm},
                  {"fit_residual_ohm", fit.fit_residual_ohm},
                  {"intercept_clamped", fit.intercept_clamped},
                  {"clamp_adjustment_ohm", fit.clamp_adjustment_ohm}};
        std::ofstream jf(tlm_json_out, std::ios::binary);
        if (!jf) throw Error("cannot write " + tlm_json_out);
        jf << j.dump(2) << "\n";
      }
      return 0;
    }
    if (cmd_validate->parsed()) {
      const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
      cfg.validate();
      out << "config ok\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    return detail::fail(err, "config", e.what(), 2);
  } catch (const ValidationError& e) {
    return detail::fail(err, "validation", e.what(), 2);
  } catch (const NumericalError& e) {
    return detail::fail(err, "numerical", e.what(), 3);
  } catch (const Error& e) {
    return detail::fail(err, "io", e.what(), 4);
  } catch (const std::exception& e) {
    return detail::fail(err, "internal", e.what(), 5);
  }
  return 2;
}

}  // namespace camsim::cli
