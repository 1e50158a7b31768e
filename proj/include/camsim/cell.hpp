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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "camsim/device.hpp"
#include "camsim/errors.hpp"

namespace camsim {

enum class CellKind : std::uint8_t { Sot, Fefet, Sram };

/// Discharge transistor abstraction: hard cutoff below threshold, effective
/// channel resistance 1 / (k_sat * overdrive) above it, floored at r_on_min.
/// Defaults describe the deliberately weak (near-threshold) discharge device
/// these arrays use to keep discharge currents small.
struct TransistorModel {
  double vth_v = 0.32;
  double k_sat_a_per_v2 = 3.7e-6;
  double r_on_min_ohm = 5e3;

  void validate() const {
    if (vth_v <= 0.0 || k_sat_a_per_v2 <= 0.0 || r_on_min_ohm <= 0.0) {
      throw ValidationError("TransistorModel: parameters must be positive");
    }
  }
};

/// Per-technology electrical description of one CAM cell's discharge path:
/// stored bit + search bit select a gate drive, which sets the conductance of
/// a transistor in series with the reference resistor to ground.
struct CellTechnology {
  CellKind kind = CellKind::Fefet;
  TransistorModel transistor;
  /// Series reference resistance; 0 reproduces the unmodified design.
  double rref_ohm = 4e6;
  std::optional<MtjModel> mtj;      // SOT only
  std::optional<FefetModel> fefet;  // FeFET only

  void validate() const {
    transistor.validate();
    if (rref_ohm < 0.0) {
      throw ValidationError("CellTechnology: rref must be >= 0");
    }
    switch (kind) {
      case CellKind::Sot:
        if (!mtj) throw ValidationError("CellTechnology: SOT requires mtj");
        if (fefet) {
          throw ValidationError("CellTechnology: SOT must not carry fefet");
        }
        mtj->validate();
        break;
      case CellKind::Fefet:
        if (!fefet) {
          throw ValidationError("CellTechnology: FeFET requires fefet");
        }
        if (mtj) throw ValidationError("CellTechnology: FeFET must not carry mtj");
        fefet->validate();
        break;
      case CellKind::Sram:
        if (mtj || fefet) {
          throw ValidationError("CellTechnology: SRAM carries no sub-model");
        }
        break;
    }
  }
};

struct CellState {
  std::uint8_t stored = 0;
  std::uint8_t search = 0;
  bool match() const { return stored == search; }
};

/// Per-cell realized device values after variation sampling. Scales of 1 and
/// shift of 0 give the nominal cell.
struct CellVariation {
  double rref_ohm = 0.0;     ///< Realized series resistance.
  double mtj_scale_hi = 1.0; ///< Scale on the searchline-side junction.
  double mtj_scale_lo = 1.0; ///< Scale on the ground-side junction.
  double vth_shift_v = 0.0;

  static CellVariation nominal(const CellTechnology& tech) {
    CellVariation v;
    v.rref_ohm = tech.rref_ohm;
    return v;
  }
};

namespace detail {

struct SotDivider {
  double gate_v = 0.0;
  double current_a = 0.0;
  double branch_resistance_ohm = 0.0;
  /// Divider ratio at the solved bias point; used as d(gate)/d(v_searchline).
  double ratio = 0.0;
};

// The SOT cell splits the searchline voltage across two complementary
// junctions; the midpoint drives the discharge gate. On a mismatch the
// ground-side junction is antiparallel (high), pulling the gate up; on a
// match the searchline-side junction is antiparallel, pulling it down.
// Resistances depend on the per-junction bias, so the midpoint is solved by
// damped fixed-point iteration to 1 uV.
inline SotDivider solve_sot_divider(const MtjModel& mtj, bool match,
                                    double v_searchline,
                                    const CellVariation& var,
                                    double gate_guess) {
  constexpr double kTolV = 1e-6;
  constexpr int kMaxIter = 100;
  constexpr double kDamping = 0.7;

  const MtjState hi_state = match ? MtjState::Antiparallel : MtjState::Parallel;
  const MtjState lo_state = match ? MtjState::Parallel : MtjState::Antiparallel;

  double g = std::clamp(gate_guess, 0.0, v_searchline);
  SotDivider out;
  for (int it = 0; it < kMaxIter; ++it) {
    const double r_hi =
        var.mtj_scale_hi * mtj_resistance(mtj, hi_state, v_searchline - g);
    const double r_lo = var.mtj_scale_lo * mtj_resistance(mtj, lo_state, g);
    const double ratio = r_lo / (r_hi + r_lo);
    const double target = v_searchline * ratio;
    const double next = g + kDamping * (target - g);
    const bool done = std::abs(next - g) < kTolV;
    g = next;
    if (done) {
      out.gate_v = g;
      out.branch_resistance_ohm = r_hi + r_lo;
      out.current_a = v_searchline / out.branch_resistance_ohm;
      out.ratio = ratio;
      return out;
    }
  }
  throw NumericalError("solve_sot_divider: no convergence in 100 iterations");
}

}  // namespace detail

/// Effective threshold of the discharge transistor for this cell; FeFET cells
/// encode match/mismatch as the high/low threshold state.
inline double effective_vth(const CellTechnology& tech, const CellState& state,
                            const CellVariation& var) {
  double vth;
  if (tech.kind == CellKind::Fefet) {
    vth = state.match() ? tech.fefet->vth_high_v : tech.fefet->vth_low_v;
  } else {
    vth = tech.transistor.vth_v;
  }
  return vth + var.vth_shift_v;
}

/// Voltage at the discharge transistor's gate given the local searchline
/// voltage. `gate_guess` warm-starts the SOT divider iteration.
inline double gate_drive(const CellTechnology& tech, const CellState& state,
                         double v_searchline,
                         const CellVariation& var,
                         double gate_guess = 0.0) {
  switch (tech.kind) {
    case CellKind::Sram:
      return state.match() ? 0.0 : v_searchline;
    case CellKind::Fefet:
      return v_searchline;
    case CellKind::Sot:
      return detail::solve_sot_divider(*tech.mtj, state.match(), v_searchline,
                                       var, gate_guess)
          .gate_v;
  }
  return 0.0;
}

inline double gate_drive(const CellTechnology& tech, const CellState& state,
                         double v_searchline) {
  return gate_drive(tech, state, v_searchline, CellVariation::nominal(tech));
}

/// Channel resistance at the given gate overdrive (gate above threshold).
inline double channel_resistance(const TransistorModel& t, double overdrive_v) {
  return std::max(t.r_on_min_ohm, 1.0 / (t.k_sat_a_per_v2 * overdrive_v));
}

/// Conductance of the discharge path (channel in series with rref);
/// 0 when the gate is at or below the effective threshold.
inline double discharge_conductance(const CellTechnology& tech,
                                    const CellState& state, double gate_v,
                                    const CellVariation& var) {
  const double od = gate_v - effective_vth(tech, state, var);
  if (od <= 0.0) return 0.0;
  return 1.0 / (channel_resistance(tech.transistor, od) + var.rref_ohm);
}

/// Matchline discharge current drawn by this cell.
inline double discharge_current(const CellTechnology& tech,
                                const CellState& state, double gate_v,
                                double v_matchline, const CellVariation& var) {
  if (gate_v < 0.0 || v_matchline < 0.0) {
    throw ValidationError("discharge_current: negative node voltage");
  }
  return discharge_conductance(tech, state, gate_v, var) * v_matchline;
}

inline double discharge_current(const CellTechnology& tech,
                                const CellState& state, double gate_v,
                                double v_matchline) {
  return discharge_current(tech, state, gate_v, v_matchline,
                           CellVariation::nominal(tech));
}

/// Static current the cell draws from the searchline. Only the SOT divider
/// conducts; FeFET and SRAM cells present a gate-only (zero-current) load.
inline double searchline_load_current(const CellTechnology& tech,
                                      const CellState& state,
                                      double v_searchline,
                                      const CellVariation& var) {
  if (v_searchline < 0.0) {
    throw ValidationError("searchline_load_current: negative voltage");
  }
  if (tech.kind != CellKind::Sot || v_searchline == 0.0) return 0.0;
  return detail::solve_sot_divider(*tech.mtj, state.match(), v_searchline, var,
                                   0.5 * v_searchline)
      .current_a;
}

inline double searchline_load_current(const CellTechnology& tech,
                                      const CellState& state,
                                      double v_searchline) {
  return searchline_load_current(tech, state, v_searchline,
                                 CellVariation::nominal(tech));
}

}  // namespace camsim
