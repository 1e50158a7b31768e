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

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "camsim/analysis.hpp"

namespace camsim {

using Json = nlohmann::ordered_json;

enum class StudyKind : std::uint8_t { Sweep, MonteCarlo, Compare, TlmFit };

namespace detail {

/// Strict object reader: every key must be consumed, unknown keys are a hard
/// error (anti-typo contract). Problems accumulate so one pass reports all.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path, std::vector<std::string>& problems)
      : j_(j), path_(std::move(path)), problems_(problems) {
    if (!j_.is_object()) {
      problems_.push_back(path_ + ": expected an object");
      valid_ = false;
    }
  }

  ~StrictObject() {
    if (!valid_) return;
    for (const auto& [key, value] : j_.items()) {
      if (!consumed_.count(key)) {
        problems_.push_back(path_ + "." + key + ": unknown key");
      }
    }
  }

  bool has(const std::string& key) {
    return valid_ && j_.contains(key);
  }

  const Json* take(const std::string& key) {
    if (!valid_ || !j_.contains(key)) return nullptr;
    consumed_.insert(key);
    return &j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const Json* v = take(key);
    if (v == nullptr) return;
    try {
      out = v->get<T>();
    } catch (const Json::exception&) {
      problems_.push_back(path_ + "." + key + ": wrong type");
    }
  }

  void get_enum(const std::string& key, std::string& out,
                const std::set<std::string>& allowed) {
    const Json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_string() || !allowed.count(v->get<std::string>())) {
      std::string opts;
      for (const std::string& a : allowed) opts += (opts.empty() ? "" : "|") + a;
      problems_.push_back(path_ + "." + key + ": expected one of " + opts);
      return;
    }
    out = v->get<std::string>();
  }

  std::vector<std::string>& problems() { return problems_; }
  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> consumed_;
  bool valid_ = true;
};

inline std::vector<int> parse_hdist_set(const Json& j, const std::string& path,
                                        std::vector<std::string>& problems) {
  std::vector<int> out;
  if (j.is_array()) {
    for (const Json& e : j) {
      if (!e.is_number_integer()) {
        problems.push_back(path + ": entries must be integers");
        return out;
      }
      out.push_back(e.get<int>());
    }
  } else if (j.is_object()) {
    StrictObject o(j, path, problems);
    int from = 1, to = 0;
    o.get("from", from);
    o.get("to", to);
    if (to < from) {
      problems.push_back(path + ": to < from");
      return out;
    }
    for (int h = from; h <= to; ++h) out.push_back(h);
  } else {
    problems.push_back(path + ": expected array or {from, to}");
  }
  return out;
}

}  // namespace detail

/// Cell technology parameters as configured; both storage sub-models may be
/// present so one config can drive multi-technology comparisons.
struct TechnologyConfig {
  CellKind kind = CellKind::Fefet;
  double rref_ohm = 4e6;
  TransistorModel transistor;
  MtjModel mtj;
  FefetModel fefet;

  /// Assemble a validated CellTechnology for the given kind/rref.
  CellTechnology make(CellKind k, double rref) const {
    CellTechnology tech;
    tech.kind = k;
    tech.rref_ohm = rref;
    tech.transistor = transistor;
    if (k == CellKind::Sot) tech.mtj = mtj;
    if (k == CellKind::Fefet) tech.fefet = fefet;
    tech.validate();
    return tech;
  }
  CellTechnology make() const { return make(kind, rref_ohm); }
};

/// One entry of a compare study.
struct DesignConfig {
  std::string name;
  CellKind kind = CellKind::Sot;
  double rref_ohm = 0.0;
  PrechargeScheme scheme = PrechargeScheme::Standard;
  double precharge_hold_s = 0.0;
};

struct StudyConfig {
  StudyKind kind = StudyKind::Sweep;
  std::vector<int> hdist_set;
  int n_trials = 100;
  VariationSigmas sigmas{0.27, 0.15, 0.042};
  std::uint64_t seed = 1;
  std::vector<double> rref_sweep_ohm;
  ColumnPlacement placement = ColumnPlacement::Random;
  std::optional<CornerMode> corner_mode;  // defaulted per study kind
  McRowStrategy mc_row_strategy = McRowStrategy::Cycle;
  int mc_fixed_row = 0;
  int reference_hdist = 20;
  std::vector<DesignConfig> designs;
  std::string tlm_csv;
  double tlm_width_um = kTlmReferenceWidthUm;

  CornerMode resolved_corner_mode() const {
    if (corner_mode) return *corner_mode;
    return kind == StudyKind::MonteCarlo ? CornerMode::ThreeSigma
                                         : CornerMode::MinMax;
  }
};

/// Full declarative experiment description.
struct ExperimentConfig {
  ArrayConfig array;
  TechnologyConfig technology;
  SimulationSettings simulation;
  StudyConfig study;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
  }

  void validate() const;
  Json resolved() const;
};

namespace detail {

inline const char* kind_name(CellKind k) {
  switch (k) {
    case CellKind::Sot: return "sot";
    case CellKind::Fefet: return "fefet";
    case CellKind::Sram: return "sram";
  }
  return "?";
}
inline CellKind kind_from(const std::string& s) {
  if (s == "sot") return CellKind::Sot;
  if (s == "fefet") return CellKind::Fefet;
  return CellKind::Sram;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  {
    detail::StrictObject root(j, "config", problems);
    if (const Json* arr = root.take("array")) {
      detail::StrictObject a(*arr, "array", problems);
      a.get("rows", cfg.array.rows);
      a.get("cols", cfg.array.cols);
      a.get("vdd_v", cfg.array.vdd_v);
      a.get("vs_v", cfg.array.vs_v);
      a.get("wire_r_per_cell_ohm", cfg.array.wire_r_per_cell_ohm);
      a.get("wire_c_per_cell_f", cfg.array.wire_c_per_cell_f);
      a.get("matchline_c_per_cell_f", cfg.array.matchline_c_per_cell_f);
      a.get("sense_threshold_v", cfg.array.sense_threshold_v);
      a.get("driver_r_ohm", cfg.array.driver_r_ohm);
      std::string scheme = "standard";
      a.get_enum("scheme", scheme, {"standard", "prolonged_pre"});
      cfg.array.scheme = scheme == "prolonged_pre" ? PrechargeScheme::ProlongedPre
                                                   : PrechargeScheme::Standard;
      a.get("precharge_hold_s", cfg.array.precharge_hold_s);
    }
    if (const Json* tech = root.take("technology")) {
      detail::StrictObject t(*tech, "technology", problems);
      std::string kind = "fefet";
      t.get_enum("kind", kind, {"sot", "fefet", "sram"});
      cfg.technology.kind = detail::kind_from(kind);
      t.get("rref_ohm", cfg.technology.rref_ohm);
      if (const Json* tr = t.take("transistor")) {
        detail::StrictObject o(*tr, "technology.transistor", problems);
        o.get("vth_v", cfg.technology.transistor.vth_v);
        o.get("k_sat_a_per_v2", cfg.technology.transistor.k_sat_a_per_v2);
        o.get("r_on_min_ohm", cfg.technology.transistor.r_on_min_ohm);
      }
      if (const Json* m = t.take("mtj")) {
        detail::StrictObject o(*m, "technology.mtj", problems);
        o.get("diameter_nm", cfg.technology.mtj.diameter_nm);
        o.get("ra_ohm_um2", cfg.technology.mtj.ra_ohm_um2);
        o.get("tmr_zero_bias", cfg.technology.mtj.tmr_zero_bias);
        o.get("half_bias_v", cfg.technology.mtj.half_bias_v);
      }
      if (const Json* f = t.take("fefet")) {
        detail::StrictObject o(*f, "technology.fefet", problems);
        o.get("vth_low_v", cfg.technology.fefet.vth_low_v);
        o.get("vth_high_v", cfg.technology.fefet.vth_high_v);
      }
    }
    if (const Json* sim = root.take("simulation")) {
      detail::StrictObject s(*sim, "simulation", problems);
      std::string method = "trapezoidal";
      s.get_enum("method", method, {"trapezoidal", "backward_euler"});
      cfg.simulation.method = method == "backward_euler"
                                  ? IntegrationMethod::BackwardEuler
                                  : IntegrationMethod::Trapezoidal;
      s.get("dt_initial_s", cfg.simulation.dt_initial_s);
      s.get("tolerance_v", cfg.simulation.tolerance_v);
      s.get("t_max_s", cfg.simulation.t_max_s);
      s.get("steady_state_eps_v_per_s", cfg.simulation.steady_state_eps_v_per_s);
    }
    if (const Json* study = root.take("study")) {
      detail::StrictObject s(*study, "study", problems);
      std::string kind = "sweep";
      s.get_enum("kind", kind, {"sweep", "monte_carlo", "compare", "tlm_fit"});
      cfg.study.kind = kind == "monte_carlo" ? StudyKind::MonteCarlo
                       : kind == "compare"   ? StudyKind::Compare
                       : kind == "tlm_fit"   ? StudyKind::TlmFit
                                             : StudyKind::Sweep;
      if (const Json* hs = s.take("hdist_set")) {
        cfg.study.hdist_set =
            detail::parse_hdist_set(*hs, "study.hdist_set", problems);
      }
      s.get("n_trials", cfg.study.n_trials);
      if (const Json* sg = s.take("sigmas")) {
        detail::StrictObject o(*sg, "study.sigmas", problems);
        o.get("rref_fraction_3s", cfg.study.sigmas.rref_fraction_3s);
        o.get("mtj_fraction_3s", cfg.study.sigmas.mtj_fraction_3s);
        o.get("vth_abs_3s_v", cfg.study.sigmas.vth_abs_3s_v);
      }
      s.get("seed", cfg.study.seed);
      s.get("rref_sweep_ohm", cfg.study.rref_sweep_ohm);
      std::string placement = "random";
      s.get_enum("placement", placement, {"random", "contiguous"});
      cfg.study.placement = placement == "contiguous"
                                ? ColumnPlacement::Contiguous
                                : ColumnPlacement::Random;
      if (s.has("corner_mode")) {
        std::string mode;
        s.get_enum("corner_mode", mode, {"min_max", "three_sigma"});
        if (!mode.empty()) {
          cfg.study.corner_mode = mode == "three_sigma" ? CornerMode::ThreeSigma
                                                        : CornerMode::MinMax;
        }
      }
      std::string strategy = "cycle";
      s.get_enum("mc_row_strategy", strategy, {"cycle", "fixed"});
      cfg.study.mc_row_strategy = strategy == "fixed" ? McRowStrategy::Fixed
                                                      : McRowStrategy::Cycle;
      s.get("mc_fixed_row", cfg.study.mc_fixed_row);
      s.get("reference_hdist", cfg.study.reference_hdist);
      if (const Json* designs = s.take("designs")) {
        if (!designs->is_array()) {
          problems.push_back("study.designs: expected an array");
        } else {
          int idx = 0;
          for (const Json& dj : *designs) {
            detail::StrictObject o(dj, "study.designs[" + std::to_string(idx) + "]",
                                   problems);
            DesignConfig d;
            o.get("name", d.name);
            std::string dkind = "sot";
            o.get_enum("kind", dkind, {"sot", "fefet", "sram"});
            d.kind = detail::kind_from(dkind);
            o.get("rref_ohm", d.rref_ohm);
            std::string dscheme = "standard";
            o.get_enum("scheme", dscheme, {"standard", "prolonged_pre"});
            d.scheme = dscheme == "prolonged_pre" ? PrechargeScheme::ProlongedPre
                                                  : PrechargeScheme::Standard;
            o.get("precharge_hold_s", d.precharge_hold_s);
            if (d.name.empty()) d.name = "design" + std::to_string(idx);
            cfg.study.designs.push_back(d);
            ++idx;
          }
        }
      }
      s.get("tlm_csv", cfg.study.tlm_csv);
      s.get("tlm_width_um", cfg.study.tlm_width_um);
    }
    root.get("output_dir", cfg.output_dir);
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

inline void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto guard = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      problems.push_back(std::string(what) + ": " + e.what());
    }
  };
  guard("array", [&] { array.validate(); });
  guard("simulation", [&] { simulation.validate(); });
  guard("study.sigmas", [&] { study.sigmas.validate(); });

  if (study.kind == StudyKind::Sweep || study.kind == StudyKind::MonteCarlo) {
    if (study.hdist_set.empty()) {
      problems.push_back("study.hdist_set: required and non-empty");
    }
    for (int h : study.hdist_set) {
      if (h < 0 || h > array.cols) {
        problems.push_back("study.hdist_set: value " + std::to_string(h) +
                           " outside [0, cols]");
        break;
      }
    }
  }
  if (study.kind != StudyKind::TlmFit) {
    guard("technology", [&] { (void)technology.make(); });
  }
  if (study.kind == StudyKind::MonteCarlo && study.n_trials < 2) {
    problems.push_back("study.n_trials: must be >= 2");
  }
  if (study.kind == StudyKind::Compare) {
    if (study.designs.empty()) {
      problems.push_back("study.designs: required for compare studies");
    }
    if (study.reference_hdist < 1 || study.reference_hdist > array.cols) {
      problems.push_back("study.reference_hdist: outside [1, cols]");
    }
    for (const DesignConfig& d : study.designs) {
      guard(("study.designs." + d.name).c_str(),
            [&] { (void)technology.make(d.kind, d.rref_ohm); });
    }
  }
  if (study.kind == StudyKind::TlmFit) {
    if (study.tlm_csv.empty()) {
      problems.push_back("study.tlm_csv: required for tlm_fit studies");
    } else if (!std::ifstream(study.tlm_csv)) {
      problems.push_back("study.tlm_csv: file not found: " + study.tlm_csv);
    }
    if (study.tlm_width_um <= 0.0) {
      problems.push_back("study.tlm_width_um: must be positive");
    }
  }
  for (double r : study.rref_sweep_ohm) {
    if (r < 0.0) {
      problems.push_back("study.rref_sweep_ohm: negative resistance");
      break;
    }
  }
  if (study.mc_fixed_row < 0 || study.mc_fixed_row >= array.rows) {
    problems.push_back("study.mc_fixed_row: outside [0, rows)");
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

inline Json ExperimentConfig::resolved() const {
  Json j;
  j["array"] = {
      {"rows", array.rows},
      {"cols", array.cols},
      {"vdd_v", array.vdd_v},
      {"vs_v", array.vs_v},
      {"wire_r_per_cell_ohm", array.wire_r_per_cell_ohm},
      {"wire_c_per_cell_f", array.wire_c_per_cell_f},
      {"matchline_c_per_cell_f", array.matchline_c_per_cell_f},
      {"sense_threshold_v", array.resolved_sense_threshold_v()},
      {"driver_r_ohm", array.driver_r_ohm},
      {"scheme", array.scheme == PrechargeScheme::ProlongedPre ? "prolonged_pre"
                                                               : "standard"},
      {"precharge_hold_s", array.precharge_hold_s},
  };
  j["technology"] = {
      {"kind", detail::kind_name(technology.kind)},
      {"rref_ohm", technology.rref_ohm},
      {"transistor",
       {{"vth_v", technology.transistor.vth_v},
        {"k_sat_a_per_v2", technology.transistor.k_sat_a_per_v2},
        {"r_on_min_ohm", technology.transistor.r_on_min_ohm}}},
      {"mtj",
       {{"diameter_nm", technology.mtj.diameter_nm},
        {"ra_ohm_um2", technology.mtj.ra_ohm_um2},
        {"tmr_zero_bias", technology.mtj.tmr_zero_bias},
        {"half_bias_v", technology.mtj.half_bias_v}}},
      {"fefet",
       {{"vth_low_v", technology.fefet.vth_low_v},
        {"vth_high_v", technology.fefet.vth_high_v}}},
  };
  j["simulation"] = {
      {"method", simulation.method == IntegrationMethod::BackwardEuler
                     ? "backward_euler"
                     : "trapezoidal"},
      {"dt_initial_s", simulation.dt_initial_s},
      {"tolerance_v", simulation.tolerance_v},
      {"t_max_s", simulation.t_max_s},
      {"steady_state_eps_v_per_s", simulation.steady_state_eps_v_per_s},
  };
  Json sj;
  switch (study.kind) {
    case StudyKind::Sweep: sj["kind"] = "sweep"; break;
    case StudyKind::MonteCarlo: sj["kind"] = "monte_carlo"; break;
    case StudyKind::Compare: sj["kind"] = "compare"; break;
    case StudyKind::TlmFit: sj["kind"] = "tlm_fit"; break;
  }
  sj["hdist_set"] = study.hdist_set;
  sj["n_trials"] = study.n_trials;
  sj["sigmas"] = {{"rref_fraction_3s", study.sigmas.rref_fraction_3s},
                  {"mtj_fraction_3s", study.sigmas.mtj_fraction_3s},
                  {"vth_abs_3s_v", study.sigmas.vth_abs_3s_v}};
  sj["seed"] = study.seed;
  sj["rref_sweep_ohm"] = study.rref_sweep_ohm;
  sj["placement"] =
      study.placement == ColumnPlacement::Contiguous ? "contiguous" : "random";
  sj["corner_mode"] = study.resolved_corner_mode() == CornerMode::ThreeSigma
                          ? "three_sigma"
                          : "min_max";
  sj["mc_row_strategy"] =
      study.mc_row_strategy == McRowStrategy::Fixed ? "fixed" : "cycle";
  sj["mc_fixed_row"] = study.mc_fixed_row;
  sj["reference_hdist"] = study.reference_hdist;
  Json designs = Json::array();
  for (const DesignConfig& d : study.designs) {
    designs.push_back({{"name", d.name},
                       {"kind", detail::kind_name(d.kind)},
                       {"rref_ohm", d.rref_ohm},
                       {"scheme", d.scheme == PrechargeScheme::ProlongedPre
                                      ? "prolonged_pre"
                                      : "standard"},
                       {"precharge_hold_s", d.precharge_hold_s}});
  }
  sj["designs"] = designs;
  sj["tlm_csv"] = study.tlm_csv;
  sj["tlm_width_um"] = study.tlm_width_um;
  j["study"] = sj;
  j["output_dir"] = output_dir;
  return j;
}

}  // namespace camsim
