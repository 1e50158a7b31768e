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

// End-to-end acceptance suite. Each test prints one PASS/FAIL line with its
// wall time; run via `ctest -R acceptance --output-on-failure` or directly.

#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "camsim/camsim.hpp"

using namespace camsim;
using Catch::Approx;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void report(const char* id, bool ok, const std::string& what, double secs) {
  std::printf("ACCEPTANCE %s %s: %s (%.1f s)\n", id, ok ? "PASS" : "FAIL",
              what.c_str(), secs);
  std::fflush(stdout);
}

CellTechnology sot_tech(double rref) {
  CellTechnology tech;
  tech.kind = CellKind::Sot;
  tech.rref_ohm = rref;
  tech.mtj = MtjModel{};
  return tech;
}

CellTechnology fefet_tech(double rref) {
  CellTechnology tech;
  tech.kind = CellKind::Fefet;
  tech.rref_ohm = rref;
  tech.fefet = FefetModel{};
  return tech;
}

CellTechnology sram_tech(double rref) {
  CellTechnology tech;
  tech.kind = CellKind::Sram;
  tech.rref_ohm = rref;
  return tech;
}

std::vector<int> hdist_range(int from, int to) {
  std::vector<int> out;
  for (int h = from; h <= to; ++h) out.push_back(h);
  return out;
}

double relative_spread(const std::vector<double>& samples) {
  double lo = samples[0], hi = samples[0], sum = 0.0;
  for (double s : samples) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sum += s;
  }
  return (hi - lo) / (sum / static_cast<double>(samples.size()));
}

const std::string kDataDir = std::string(CAMSIM_SOURCE_DIR) + "/data";

}  // namespace

TEST_CASE("C1 TLM recovery") {
  Stopwatch watch;
  const TlmDataset clean =
      load_tlm_csv(kDataDir + "/tlm_thinfilm_w10um.csv", 10.0);
  const FilmExtraction fit = tlm_fit(clean);
  const bool clean_ok =
      std::abs(fit.sheet_resistance_ohm_sq - 3.3e6) / 3.3e6 < 1e-3;

  // 3% multiplicative Gaussian noise, fixed stream.
  bool noisy_ok = true;
  SplitRng rng = SplitRng::derive(2026, {stream_tag("tlm-noise")});
  for (int rep = 0; rep < 16; ++rep) {
    TlmDataset noisy = clean;
    for (TlmPoint& p : noisy.points) {
      p.resistance_ohm *= 1.0 + 0.03 * rng.next_gaussian();
    }
    const FilmExtraction nf = tlm_fit(noisy);
    noisy_ok = noisy_ok &&
               std::abs(nf.sheet_resistance_ohm_sq - 3.3e6) / 3.3e6 < 0.05;
  }

  const double secs = watch.seconds();
  const bool ok = clean_ok && noisy_ok && secs < 1.0;
  report("C1", ok, "TLM recovery: 3.3 Mohm/sq within 0.1% clean, 5% at 3% noise",
         secs);
  CHECK(clean_ok);
  CHECK(noisy_ok);
  CHECK(secs < 1.0);
}

TEST_CASE("C2 geometry design check") {
  Stopwatch watch;
  const TlmDataset data =
      load_tlm_csv(kDataDir + "/tlm_thinfilm_w10um.csv", 10.0);
  FilmExtraction film = tlm_fit(data);
  film.contact_resistance_ohm = 0.0;  // film-only design estimate
  const double r = resistance_from_geometry(film, 0.2, 0.2);
  const bool exact = std::abs(r - 3.3e6) < 1.0;
  const bool rounds_to_3m = std::round(r / 1e6) == 3.0;
  const bool ok = exact && rounds_to_3m;
  report("C2", ok, "0.2 um square film resistor = 3.3 Mohm (rounds to 3 Mohm)",
         watch.seconds());
  CHECK(exact);
  CHECK(rounds_to_3m);
}

TEST_CASE("C3 analytic single-pole oracle") {
  Stopwatch watch;
  CellTechnology sw = sram_tech(0.0);
  sw.transistor.vth_v = 0.05;
  sw.transistor.k_sat_a_per_v2 = 1e3;
  sw.transistor.r_on_min_ohm = 1.0;

  bool ok = true;
  for (double r_mohm : {0.5, 1.0, 4.0, 8.0}) {
    for (double c_ff : {1.0, 10.0, 100.0}) {
      const double r = r_mohm * 1e6;
      const double c = c_ff * 1e-15;
      ArrayConfig cfg;
      cfg.rows = 1;
      cfg.cols = 1;
      cfg.matchline_c_per_cell_f = c;
      cfg.wire_c_per_cell_f = 1e-21;
      BitVector query{1};
      BitMatrix stored(1, 1);
      sw.rref_ohm = r - 1.0;
      CircuitNetwork net(cfg, sw, stored, query);
      SimulationSettings sim;
      sim.t_max_s = 10.0 * r * c;
      const TransientResult res = simulate_search(net, sim);
      const double expect = r * c * std::log(2.0);
      const bool case_ok =
          res.rows[0].outcome == RowOutcome::Crossed &&
          std::abs(res.rows[0].delay_s - expect) / expect < 0.01;
      ok = ok && case_ok;
      CHECK(case_ok);
    }
  }
  const double secs = watch.seconds();
  report("C3", ok && secs < 10.0,
         "12 RC cases match R*C*ln2 within 1%", secs);
  CHECK(secs < 10.0);
}

TEST_CASE("C4 resolution trend vs reference resistance") {
  Stopwatch watch;
  ArrayConfig cfg;
  cfg.rows = 64;
  cfg.cols = 64;
  // Pronounced wire capacitance (documented non-default stress value) so the
  // searchline RC turn-on spread is visible against the discharge times.
  cfg.wire_c_per_cell_f = 2e-15;
  SimulationSettings sim;
  SweepOptions opts;
  opts.seed = 603;

  // The sweep extends past the asserted window so every asserted HDist has
  // separation candidates available.
  const std::vector<int> swept = hdist_range(1, 20);
  const int assert_max_h = 10;
  std::vector<double> rrefs = {0.5e6, 1e6, 2e6, 4e6, 8e6};
  std::vector<int> scores;
  for (double rref : rrefs) {
    const auto pops = sweep_hdist(cfg, sot_tech(rref), sim, swept, opts);
    const MddReport report_h = compute_mdd(pops, CornerMode::MinMax);
    int worst = 1;
    for (const MddEntry& e : report_h.per_hdist) {
      if (e.hdist > assert_max_h) continue;
      worst = std::max(worst, e.mdd ? *e.mdd : (1 << 20));
    }
    scores.push_back(worst);
  }

  bool non_increasing = true;
  for (std::size_t i = 1; i + 1 < scores.size(); ++i) {
    non_increasing = non_increasing && scores[i] <= scores[i - 1];
  }
  const bool resolvable_at_4m = scores[3] < (1 << 20);
  const bool diminishing =
      resolvable_at_4m && scores[3] - scores[4] <= 1;
  const double secs = watch.seconds();
  std::ostringstream what;
  what << "worst-case MDD (HDist<=10) over rref {0.5,1,2,4,8} Mohm = {";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i > 0) what << ",";
    if (scores[i] >= (1 << 20)) {
      what << "unres";
    } else {
      what << scores[i];
    }
  }
  what << "}";
  const bool ok = non_increasing && diminishing && secs < 600.0;
  report("C4", ok, what.str(), secs);
  CHECK(non_increasing);
  CHECK(resolvable_at_4m);
  CHECK(diminishing);
  CHECK(secs < 600.0);
}

TEST_CASE("C5 prolonged precharge removes position-induced spread") {
  Stopwatch watch;
  ArrayConfig cfg;
  cfg.rows = 64;
  cfg.cols = 64;
  cfg.wire_r_per_cell_ohm = 500.0;  // stress: slow searchline ladders
  cfg.wire_c_per_cell_f = 2e-15;
  SimulationSettings sim;
  SweepOptions opts;
  opts.seed = 605;
  opts.placement = ColumnPlacement::Contiguous;  // identical rows
  const int h = 8;

  cfg.scheme = PrechargeScheme::Standard;
  const auto std_pops = sweep_hdist(cfg, fefet_tech(4e6), sim, {h}, opts);
  cfg.scheme = PrechargeScheme::ProlongedPre;
  const auto pre_pops = sweep_hdist(cfg, fefet_tech(4e6), sim, {h}, opts);

  const double spread_std = relative_spread(std_pops[0].samples);
  const double spread_pre = relative_spread(pre_pops[0].samples);
  const double secs = watch.seconds();
  std::ostringstream what;
  what << "row-position delay spread at HDist=8: standard "
       << spread_std * 100.0 << "%, prolonged-precharge "
       << spread_pre * 100.0 << "%";
  const bool ok = spread_pre < 0.01 && spread_std > 0.05 && secs < 300.0;
  report("C5", ok, what.str(), secs);
  CHECK(std_pops[0].samples.size() == 64);
  CHECK(pre_pops[0].samples.size() == 64);
  CHECK(spread_pre < 0.01);
  CHECK(spread_std > 0.05);
  CHECK(secs < 300.0);
}

TEST_CASE("C6 resolution target at nominal devices") {
  Stopwatch watch;
  ArrayConfig cfg;
  cfg.rows = 128;
  cfg.cols = 128;
  cfg.scheme = PrechargeScheme::ProlongedPre;
  SimulationSettings sim;
  SweepOptions opts;
  opts.seed = 606;

  bool ok = true;
  int worst_seen = 0;
  for (const CellTechnology& tech : {fefet_tech(4e6), sram_tech(4e6)}) {
    const auto pops =
        sweep_hdist(cfg, tech, sim, hdist_range(1, 37), opts);
    const MddReport report_h = compute_mdd(pops, CornerMode::MinMax);
    for (const MddEntry& e : report_h.per_hdist) {
      if (e.hdist > 32) continue;
      const int score = e.mdd ? *e.mdd : (1 << 20);
      worst_seen = std::max(worst_seen, score);
      ok = ok && score <= 5;
    }
  }
  const double secs = watch.seconds();
  std::ostringstream what;
  what << "FeFET-R PRE and SRAM-R PRE at 4 Mohm on 128x128: max MDD over "
          "HDist 1..32 = "
       << worst_seen;
  report("C6", ok && secs < 1800.0, what.str(), secs);
  CHECK(ok);
  CHECK(secs < 1800.0);
}

TEST_CASE("C7 variation tolerance ordering") {
  Stopwatch watch;
  ArrayConfig cfg;
  cfg.rows = 32;
  cfg.cols = 32;
  cfg.wire_r_per_cell_ohm = 200.0;  // stress wiring, as in C4/C5
  cfg.wire_c_per_cell_f = 2e-15;
  SimulationSettings sim;
  MonteCarloOptions mc;
  mc.n_trials = 100;
  mc.seed = 607;
  mc.sigmas = VariationSigmas{0.27, 0.15, 0.042};

  struct Design {
    const char* name;
    double rref;
    PrechargeScheme scheme;
  };
  const Design designs[] = {
      {"sot", 0.0, PrechargeScheme::Standard},
      {"sot_r", 4e6, PrechargeScheme::Standard},
      {"sot_r_pre", 4e6, PrechargeScheme::ProlongedPre},
  };
  const std::vector<int> hdists = {4, 8, 16};

  // rel_spread[design][h-index]
  double rel[3][3];
  for (int d = 0; d < 3; ++d) {
    cfg.scheme = designs[d].scheme;
    const auto pops = monte_carlo_study(cfg, sot_tech(designs[d].rref), sim,
                                        hdists, mc);
    for (int hi = 0; hi < 3; ++hi) {
      REQUIRE(pops[hi].samples.size() == 100);
      rel[d][hi] = pops[hi].fitted_sigma / pops[hi].fitted_mean;
    }
  }

  bool ok = true;
  std::ostringstream what;
  what << "sigma/mean per HDist {4,8,16}:";
  for (int hi = 0; hi < 3; ++hi) {
    ok = ok && rel[2][hi] < rel[1][hi] && rel[1][hi] < rel[0][hi];
    what << " [sot " << rel[0][hi] * 100 << "%, sot_r " << rel[1][hi] * 100
         << "%, sot_r_pre " << rel[2][hi] * 100 << "%]";
  }
  const double secs = watch.seconds();
  report("C7", ok && secs < 3600.0, what.str(), secs);
  CHECK(ok);
  CHECK(secs < 3600.0);
}

TEST_CASE("C8 energy and delay cost of the modification") {
  Stopwatch watch;
  ArrayConfig cfg;
  cfg.rows = 128;
  cfg.cols = 128;  // default parasitics
  SimulationSettings sim;
  SweepOptions opts;
  opts.seed = 608;

  std::vector<DesignSpec> designs(2);
  designs[0] = {"sot", sot_tech(0.0), PrechargeScheme::Standard, 0.0};
  designs[1] = {"sot_r_pre", sot_tech(4e6), PrechargeScheme::ProlongedPre,
                1e-9};
  const auto rows = compare_designs(cfg, designs, sim, 20, opts);

  const double delay_ratio = rows[1].delay_ratio;
  const double energy_ratio = rows[1].energy_ratio;
  const bool delay_ok = delay_ratio >= 1.5 && delay_ratio <= 3.0;
  const bool energy_ok = energy_ratio >= 2.0 && energy_ratio <= 4.5;
  const bool directional =
      delay_ratio > 1.0 && energy_ratio > 1.0 && energy_ratio > delay_ratio;
  const double secs = watch.seconds();
  std::ostringstream what;
  what << "SOT-R PRE vs SOT at HDist=20: delay x" << delay_ratio
       << ", energy x" << energy_ratio;
  const bool ok = delay_ok && energy_ok && directional;
  report("C8", ok, what.str(), secs);
  CHECK(delay_ok);
  CHECK(energy_ok);
  CHECK(directional);
}

TEST_CASE("C9 property suites") {
  Stopwatch watch;
  bool all_ok = true;

  // (a) integrator convergence under tolerance halving
  {
    ArrayConfig cfg;
    cfg.rows = 16;
    cfg.cols = 16;
    SweepOptions opts;
    opts.seed = 609;
    SimulationSettings sim;
    const auto coarse =
        sweep_hdist(cfg, fefet_tech(4e6), sim, {1, 4, 9}, opts);
    sim.tolerance_v *= 0.5;
    const auto fine = sweep_hdist(cfg, fefet_tech(4e6), sim, {1, 4, 9}, opts);
    for (std::size_t p = 0; p < coarse.size(); ++p) {
      for (std::size_t k = 0; k < coarse[p].samples.size(); ++k) {
        const double rel = std::abs(fine[p].samples[k] - coarse[p].samples[k]) /
                           coarse[p].samples[k];
        all_ok = all_ok && rel < 0.01;
        CHECK(rel < 0.01);
      }
    }
  }

  // (b) global energy balance
  {
    for (PrechargeScheme scheme :
         {PrechargeScheme::Standard, PrechargeScheme::ProlongedPre}) {
      ArrayConfig cfg;
      cfg.rows = 16;
      cfg.cols = 16;
      cfg.scheme = scheme;
      BitVector query(16, 0);
      BitMatrix stored(16, 16);
      SplitRng rng(609);
      for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
          stored.set(r, c, rng.next_bool() ? 1 : 0);
        }
      }
      for (const CellTechnology& tech : {sot_tech(4e6), fefet_tech(4e6)}) {
        CircuitNetwork net(cfg, tech, stored, query);
        SimulationSettings sim;
        const TransientResult res = simulate_search(net, sim);
        all_ok = all_ok && res.energy.balance_error() < 0.005;
        CHECK(res.energy.balance_error() < 0.005);
      }
    }
  }

  // (c) monotonicity in HDist and Rref
  {
    ArrayConfig cfg;
    cfg.rows = 8;
    cfg.cols = 32;
    BitVector query(32, 0);
    BitMatrix stored(8, 32);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 2 * r + 1; ++c) stored.set(r, c, 1);
    }
    CircuitNetwork net(cfg, fefet_tech(4e6), stored, query);
    SimulationSettings sim;
    const TransientResult res = simulate_search(net, sim);
    for (int r = 1; r < 8; ++r) {
      all_ok = all_ok && res.rows[r].delay_s < res.rows[r - 1].delay_s;
      CHECK(res.rows[r].delay_s < res.rows[r - 1].delay_s);
    }
    double prev = 0.0;
    for (double rref : {1e6, 2e6, 4e6}) {
      CircuitNetwork n2(cfg, fefet_tech(rref), stored, query);
      const double d = simulate_search(n2, sim).rows[0].delay_s;
      all_ok = all_ok && d > prev;
      CHECK(d > prev);
      prev = d;
    }
  }

  // (d) MDD interval oracle on 50 randomized population sets
  {
    SplitRng rng(60942);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<DelayPopulation> pops;
      const int count = 4 + static_cast<int>(rng.next_below(10));
      for (int k = 0; k < count; ++k) {
        DelayPopulation pop;
        pop.hdist = 1 + k;
        const double center = 150e-9 / pop.hdist;
        const double spread = center * (0.05 + 0.6 * rng.next_double());
        const int n = 4 + static_cast<int>(rng.next_below(16));
        for (int s = 0; s < n; ++s) {
          pop.samples.push_back(center + spread * (rng.next_double() - 0.5));
          pop.origins.emplace_back(0, s);
        }
        pop.fit();
        pops.push_back(std::move(pop));
      }
      const MddReport got = compute_mdd(pops, CornerMode::MinMax);
      for (std::size_t i = 0; i + 1 < pops.size(); ++i) {
        // Exhaustive pairwise interval check.
        std::optional<int> expect;
        double lo_i = 1e300;
        for (double s : pops[i].samples) lo_i = std::min(lo_i, s);
        for (std::size_t j = i + 1; j < pops.size(); ++j) {
          double hi_j = -1e300;
          for (double s : pops[j].samples) hi_j = std::max(hi_j, s);
          if (hi_j < lo_i) {
            expect = pops[j].hdist - pops[i].hdist;
            break;
          }
        }
        all_ok = all_ok && got.per_hdist[i].mdd == expect;
        CHECK(got.per_hdist[i].mdd == expect);
      }
    }
  }

  // (e) byte-identical artifacts for a fixed seed
  {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "camsim_acceptance_seed";
    fs::remove_all(dir);
    ExperimentConfig cfg;
    cfg.array.rows = 8;
    cfg.array.cols = 16;
    cfg.technology.kind = CellKind::Sot;
    cfg.study.kind = StudyKind::MonteCarlo;
    cfg.study.hdist_set = {2, 3};
    cfg.study.n_trials = 5;
    cfg.study.seed = 610;
    auto read = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    cfg.output_dir = (dir / "a").string();
    run_study(cfg);
    cfg.output_dir = (dir / "b").string();
    run_study(cfg);
    for (const char* name :
         {"mdd_report.csv", "delay_populations.csv", "comparison.csv"}) {
      const bool same = read(dir / "a" / name) == read(dir / "b" / name);
      all_ok = all_ok && same;
      CHECK(same);
    }
  }

  const double secs = watch.seconds();
  report("C9", all_ok && secs < 600.0,
         "convergence, energy balance, monotonicity, MDD oracle, determinism",
         secs);
  CHECK(secs < 600.0);
}
