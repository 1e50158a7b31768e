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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "camsim/cell.hpp"

using namespace camsim;
using Catch::Approx;

namespace {

CellTechnology make_sot(double rref = 4e6) {
  CellTechnology tech;
  tech.kind = CellKind::Sot;
  tech.rref_ohm = rref;
  tech.mtj = MtjModel{};
  return tech;
}

CellTechnology make_fefet(double rref = 4e6) {
  CellTechnology tech;
  tech.kind = CellKind::Fefet;
  tech.rref_ohm = rref;
  tech.fefet = FefetModel{};
  return tech;
}

CellTechnology make_sram(double rref = 4e6) {
  CellTechnology tech;
  tech.kind = CellKind::Sram;
  tech.rref_ohm = rref;
  return tech;
}

constexpr CellState kMismatch{0, 1};
constexpr CellState kMatch{1, 1};

}  // namespace

TEST_CASE("technology validation enforces the per-kind sub-models") {
  CellTechnology bad = make_sot();
  bad.mtj.reset();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = make_fefet();
  bad.mtj = MtjModel{};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = make_sram();
  bad.rref_ohm = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_NOTHROW(make_sot().validate());
  CHECK_NOTHROW(make_fefet().validate());
  CHECK_NOTHROW(make_sram().validate());
}

TEST_CASE("SRAM gate drive is the complementary pass-gate") {
  const CellTechnology tech = make_sram();
  CHECK(gate_drive(tech, kMismatch, 0.7) == 0.7);
  CHECK(gate_drive(tech, kMatch, 0.7) == 0.0);
}

TEST_CASE("FeFET encodes match state in the effective threshold") {
  const CellTechnology tech = make_fefet();
  CHECK(gate_drive(tech, kMismatch, 0.7) == 0.7);
  CHECK(gate_drive(tech, kMatch, 0.7) == 0.7);
  const CellVariation nom = CellVariation::nominal(tech);
  CHECK(effective_vth(tech, kMismatch, nom) == tech.fefet->vth_low_v);
  CHECK(effective_vth(tech, kMatch, nom) == tech.fefet->vth_high_v);
  CHECK(tech.fefet->memory_window_v() == Approx(0.46));
}

TEST_CASE("SOT divider halves the searchline voltage when symmetric") {
  CellTechnology tech = make_sot();
  tech.mtj->tmr_zero_bias = 0.0;  // both junctions at R_P
  CHECK(gate_drive(tech, kMismatch, 0.7) == Approx(0.35).margin(2e-6));
  CHECK(gate_drive(tech, kMatch, 0.7) == Approx(0.35).margin(2e-6));
}

TEST_CASE("SOT divider matches an independent bisection oracle") {
  const CellTechnology tech = make_sot();
  const MtjModel& mtj = *tech.mtj;
  const CellVariation nom = CellVariation::nominal(tech);

  for (const CellState state : {kMismatch, kMatch}) {
    for (double vs = 0.1; vs <= 0.7; vs += 0.15) {
      // Solve  g * (R_hi(vs-g) + R_lo(g)) - vs * R_lo(g) = 0  by bisection.
      const MtjState hi =
          state.match() ? MtjState::Antiparallel : MtjState::Parallel;
      const MtjState lo =
          state.match() ? MtjState::Parallel : MtjState::Antiparallel;
      auto f = [&](double g) {
        const double r_hi = mtj_resistance(mtj, hi, vs - g);
        const double r_lo = mtj_resistance(mtj, lo, g);
        return g * (r_hi + r_lo) - vs * r_lo;
      };
      double a = 0.0, b = vs;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        if (f(a) * f(m) <= 0.0) {
          b = m;
        } else {
          a = m;
        }
      }
      const double oracle = 0.5 * (a + b);
      CHECK(gate_drive(tech, state, vs, nom) == Approx(oracle).margin(1e-6));
    }
  }
}

TEST_CASE("SOT gate drive is monotone in the searchline voltage") {
  const CellTechnology tech = make_sot();
  const CellVariation nom = CellVariation::nominal(tech);
  for (const CellState state : {kMismatch, kMatch}) {
    double prev = -1.0;
    for (double vs = 0.0; vs <= 0.71; vs += 0.01) {
      const double g = gate_drive(tech, state, vs, nom);
      CHECK(g >= prev - 1e-9);
      prev = g;
    }
  }
}

TEST_CASE("discharge current cuts off below threshold") {
  for (const CellTechnology& tech :
       {make_sot(), make_fefet(), make_sram()}) {
    const double vth = effective_vth(tech, kMismatch,
                                     CellVariation::nominal(tech));
    CHECK(discharge_current(tech, kMismatch, vth, 0.7) == 0.0);
    CHECK(discharge_current(tech, kMismatch, vth - 0.05, 0.7) == 0.0);
    CHECK(discharge_current(tech, kMismatch, vth + 0.05, 0.7) > 0.0);
  }
}

TEST_CASE("matching cells never discharge at their steady gate drive") {
  for (const CellTechnology& tech :
       {make_sot(), make_fefet(), make_sram()}) {
    const CellVariation nom = CellVariation::nominal(tech);
    const double gate = gate_drive(tech, kMatch, 0.7, nom);
    CHECK(discharge_current(tech, kMatch, gate, 0.7, nom) == 0.0);
  }
}

TEST_CASE("full drive into a large reference resistor is R_ref dominated") {
  CellTechnology tech = make_sram(4e6);
  tech.transistor.vth_v = 0.2;
  tech.transistor.k_sat_a_per_v2 = 1e-3;  // strong device
  tech.transistor.r_on_min_ohm = 1e3;
  const double i = discharge_current(tech, kMismatch, 0.7, 0.7);
  CHECK(i == Approx(0.7 / 4e6).epsilon(0.01));  // 175 nA
}

TEST_CASE("zero reference resistance reproduces the unmodified cell") {
  CellTechnology tech = make_sram(0.0);
  const double od = 0.7 - tech.transistor.vth_v;
  const double r_ch = channel_resistance(tech.transistor, od);
  CHECK(discharge_current(tech, kMismatch, 0.7, 0.7) ==
        Approx(0.7 / r_ch).epsilon(1e-12));
}

TEST_CASE("discharge current is monotone in gate and matchline voltage") {
  SplitRng rng(5);
  for (int draw = 0; draw < 50; ++draw) {
    CellTechnology tech = make_sram(rng.next_double() * 8e6);
    tech.transistor.vth_v = 0.1 + 0.4 * rng.next_double();
    tech.transistor.k_sat_a_per_v2 = 1e-6 * std::pow(10.0, rng.next_double() * 3);
    tech.transistor.r_on_min_ohm = 1e3 + 1e4 * rng.next_double();
    double prev = -1.0;
    for (double gate = 0.0; gate <= 1.0; gate += 0.02) {
      const double i = discharge_current(tech, kMismatch, gate, 0.7);
      CHECK(i >= prev - 1e-18);
      prev = i;
    }
    prev = -1.0;
    for (double vml = 0.0; vml <= 0.7; vml += 0.02) {
      const double i = discharge_current(tech, kMismatch, 0.6, vml);
      CHECK(i >= prev - 1e-18);
      prev = i;
    }
  }
}

TEST_CASE("series dominance: rref >= 10 R_ch keeps current within 10%") {
  SplitRng rng(17);
  for (int draw = 0; draw < 50; ++draw) {
    CellTechnology tech = make_sram();
    tech.transistor.vth_v = 0.1 + 0.3 * rng.next_double();
    tech.transistor.k_sat_a_per_v2 = 1e-5 * (1.0 + 9.0 * rng.next_double());
    const double gate = tech.transistor.vth_v + 0.1 + 0.4 * rng.next_double();
    const double r_ch = channel_resistance(tech.transistor,
                                           gate - tech.transistor.vth_v);
    tech.rref_ohm = 10.0 * r_ch * (1.0 + rng.next_double());
    const double i = discharge_current(tech, kMismatch, gate, 0.7);
    CHECK(i == Approx(0.7 / tech.rref_ohm).epsilon(0.10));
  }
}

TEST_CASE("searchline load current") {
  SECTION("FeFET and SRAM draw nothing") {
    CHECK(searchline_load_current(make_fefet(), kMismatch, 0.7) == 0.0);
    CHECK(searchline_load_current(make_sram(), kMatch, 0.7) == 0.0);
  }
  SECTION("SOT draws the divider current") {
    CellTechnology tech = make_sot();
    tech.mtj->tmr_zero_bias = 0.0;
    // Pick RA so the divider totals 1 Mohm.
    tech.mtj->ra_ohm_um2 = 0.5e6 * tech.mtj->area_um2();
    const double i = searchline_load_current(tech, kMismatch, 0.7);
    CHECK(i == Approx(0.7 / 1e6).epsilon(1e-6));  // 700 nA
  }
}

TEST_CASE("per-cell variation shifts the discharge path") {
  CellTechnology tech = make_sram(4e6);
  CellVariation var = CellVariation::nominal(tech);
  var.rref_ohm = 8e6;
  const double nominal = discharge_current(tech, kMismatch, 0.7, 0.7,
                                           CellVariation::nominal(tech));
  const double shifted = discharge_current(tech, kMismatch, 0.7, 0.7, var);
  CHECK(shifted < nominal);
  var = CellVariation::nominal(tech);
  var.vth_shift_v = 0.2;
  CHECK(discharge_current(tech, kMismatch, tech.transistor.vth_v + 0.1, 0.7,
                          var) == 0.0);
}
