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

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "camsim/cell.hpp"
#include "camsim/errors.hpp"
#include "camsim/rng.hpp"

namespace camsim {

enum class PrechargeScheme : std::uint8_t { Standard, ProlongedPre };

/// Array dimensions, drive voltages and per-segment wire parasitics.
/// The parasitic defaults are order-of-magnitude estimates for a 7 nm-class
/// pitch, not extracted values; override them per experiment.
struct ArrayConfig {
  int rows = 128;
  int cols = 128;
  double vdd_v = 0.7;
  double vs_v = 0.7;
  double wire_r_per_cell_ohm = 20.0;
  double wire_c_per_cell_f = 5e-17;
  double matchline_c_per_cell_f = 1e-16;
  /// Matchline sense trip point; 0 selects vdd/2.
  double sense_threshold_v = 0.0;
  double driver_r_ohm = 1e3;
  PrechargeScheme scheme = PrechargeScheme::Standard;
  /// Hold duration for the prolonged-precharge scheme; 0 selects automatic
  /// steady-state detection.
  double precharge_hold_s = 0.0;

  double resolved_sense_threshold_v() const {
    return sense_threshold_v > 0.0 ? sense_threshold_v : 0.5 * vdd_v;
  }

  void validate() const {
    if (rows < 1 || cols < 1) {
      throw ValidationError("ArrayConfig: rows and cols must be >= 1");
    }
    if (vdd_v <= 0.0 || vs_v <= 0.0) {
      throw ValidationError("ArrayConfig: drive voltages must be positive");
    }
    if (wire_r_per_cell_ohm <= 0.0 || wire_c_per_cell_f <= 0.0 ||
        matchline_c_per_cell_f <= 0.0 || driver_r_ohm <= 0.0) {
      throw ValidationError("ArrayConfig: parasitics must be positive");
    }
    const double th = resolved_sense_threshold_v();
    if (th <= 0.0 || th >= vdd_v) {
      throw ValidationError("ArrayConfig: sense threshold outside (0, vdd)");
    }
    if (precharge_hold_s < 0.0) {
      throw ValidationError("ArrayConfig: negative precharge hold");
    }
  }
};

using BitVector = std::vector<std::uint8_t>;

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), bits_(static_cast<std::size_t>(rows) * cols, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint8_t operator()(int r, int c) const {
    return bits_[static_cast<std::size_t>(r) * cols_ + c];
  }
  void set(int r, int c, std::uint8_t v) {
    bits_[static_cast<std::size_t>(r) * cols_ + c] = v;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

using SparseMat = Eigen::SparseMatrix<double>;

/// Instantaneous power bookkeeping at one operating point.
struct PowerSample {
  double delivered_w = 0.0;   ///< Total sourced by SL + ML drivers.
  double dissipated_w = 0.0;  ///< Total across every resistive element.
  double searchline_driver_w = 0.0;
  double matchline_driver_w = 0.0;
};

/// The assembled array circuit: one searchline RC ladder per column driven
/// from the row-0 edge, one matchline per row with per-cell capacitance and
/// nonlinear discharge branches gated by the local searchline node.
///
/// Unknowns are node voltages; drivers are Thevenin sources folded into the
/// resistive network, so the state equations are C dv/dt = I(v).
class CircuitNetwork {
 public:
  CircuitNetwork(const ArrayConfig& config, const CellTechnology& tech,
                 BitMatrix stored, BitVector query)
      : config_(config),
        tech_(tech),
        stored_(std::move(stored)),
        query_(std::move(query)) {
    config_.validate();
    tech_.validate();
    if (stored_.rows() != config_.rows || stored_.cols() != config_.cols) {
      throw ValidationError("build_network: stored word dimensions mismatch");
    }
    if (static_cast<int>(query_.size()) != config_.cols) {
      throw ValidationError("build_network: query length mismatch");
    }
    perm_.resize(unknown_count());
    std::iota(perm_.begin(), perm_.end(), 0);
    variations_.assign(
        static_cast<std::size_t>(config_.rows) * config_.cols,
        CellVariation::nominal(tech_));
    build();
  }

  const ArrayConfig& config() const { return config_; }
  const CellTechnology& tech() const { return tech_; }
  int rows() const { return config_.rows; }
  int cols() const { return config_.cols; }

  /// Attach a sampled per-cell parameter set (Monte Carlo overrides).
  void set_cell_variation(int r, int c, const CellVariation& var) {
    variations_[cell_flat(r, c)] = var;
    rebuild_cells();
  }
  void set_all_variations(std::vector<CellVariation> vars) {
    if (vars.size() != variations_.size()) {
      throw ValidationError("set_all_variations: size mismatch");
    }
    variations_ = std::move(vars);
    rebuild_cells();
  }

  // --- node bookkeeping -----------------------------------------------------

  int unknown_count() const { return 2 * config_.rows * config_.cols; }
  /// Ideal-source nodes: one searchline driver per column plus one matchline
  /// precharge driver per row.
  int source_count() const { return config_.rows + config_.cols; }
  int node_count() const { return unknown_count() + source_count(); }

  int sl_node(int r, int c) const {
    return perm_[static_cast<std::size_t>(c) * config_.rows + r];
  }
  int ml_node(int r, int c) const {
    return perm_[static_cast<std::size_t>(config_.rows) * config_.cols +
                 static_cast<std::size_t>(r) * config_.cols + c];
  }
  int sense_node(int r) const { return ml_node(r, 0); }

  std::string node_label(int unknown) const { return labels_[unknown]; }

  std::size_t wire_branch_count() const { return wires_.size(); }
  std::size_t driver_branch_count() const { return drivers_.size(); }
  std::size_t discharge_branch_count() const {
    std::size_t n = 0;
    for (const Cell& cell : cells_) n += cell.state.match() ? 0 : 1;
    return n;
  }
  std::size_t searchline_load_count() const {
    return tech_.kind == CellKind::Sot ? cells_.size() : 0;
  }
  std::size_t capacitor_count() const {
    return static_cast<std::size_t>(unknown_count());
  }

  int row_mismatch_count(int r) const {
    int n = 0;
    for (int c = 0; c < config_.cols; ++c) {
      if (stored_(r, c) != query_[c]) ++n;
    }
    return n;
  }

  const Eigen::VectorXd& capacitance() const { return cap_; }

  /// Initial state: searchlines discharged, matchlines precharged to vdd.
  Eigen::VectorXd initial_state() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(unknown_count());
    for (int r = 0; r < config_.rows; ++r) {
      for (int c = 0; c < config_.cols; ++c) {
        v[ml_node(r, c)] = config_.vdd_v;
      }
    }
    return v;
  }

  /// Shuffle the internal unknown ordering (assembly permutation hook).
  void permute_unknowns(std::uint64_t seed) {
    SplitRng rng = SplitRng::derive(seed, {stream_tag("permute")});
    for (std::size_t i = perm_.size(); i > 1; --i) {
      std::swap(perm_[i - 1], perm_[rng.next_below(i)]);
    }
    build();
  }

  // --- evaluation -----------------------------------------------------------

  /// Computes f = I(v), the resistive current flowing into every unknown.
  /// When `jac` is non-null, d I / d v is accumulated into it scaled by
  /// `jac_scale` (the matrix is zeroed first; its pattern is fixed).
  void eval(const Eigen::VectorXd& v, bool ml_drivers_on, Eigen::VectorXd& f,
            SparseMat* jac = nullptr, double jac_scale = 1.0) const {
    f.setZero(unknown_count());
    double* jv = nullptr;
    if (jac != nullptr) {
      std::fill(jac->valuePtr(), jac->valuePtr() + jac->nonZeros(), 0.0);
      jv = jac->valuePtr();
    }

    for (const Wire& w : wires_) {
      const double i = w.g * (v[w.b] - v[w.a]);
      f[w.a] += i;
      f[w.b] -= i;
      if (jv != nullptr) {
        jv[w.s_aa] += jac_scale * (-w.g);
        jv[w.s_ab] += jac_scale * w.g;
        jv[w.s_bb] += jac_scale * (-w.g);
        jv[w.s_ba] += jac_scale * w.g;
      }
    }

    for (const Driver& d : drivers_) {
      if (d.is_matchline && !ml_drivers_on) continue;
      f[d.node] += d.g * (d.source_v - v[d.node]);
      if (jv != nullptr) jv[d.s_nn] += jac_scale * (-d.g);
    }

    const bool sot = tech_.kind == CellKind::Sot;
    for (const Cell& cell : cells_) {
      const double v_sl = v[cell.sl];
      const double v_ml = v[cell.ml];
      double gate, dgate_dvsl;
      if (sot) {
        const detail::SotDivider div = detail::solve_sot_divider(
            *tech_.mtj, cell.state.match(), std::max(v_sl, 0.0),
            variations_[cell.flat], cell.gate_cache);
        cell.gate_cache = div.gate_v;
        gate = div.gate_v;
        dgate_dvsl = div.ratio;
        f[cell.sl] -= div.current_a;
        if (jv != nullptr && div.branch_resistance_ohm > 0.0) {
          jv[cell.s_ss] += jac_scale * (-1.0 / div.branch_resistance_ohm);
        }
      } else if (tech_.kind == CellKind::Sram) {
        gate = cell.state.match() ? 0.0 : v_sl;
        dgate_dvsl = cell.state.match() ? 0.0 : 1.0;
      } else {
        gate = v_sl;
        dgate_dvsl = 1.0;
      }

      const double od = gate - cell.vth_eff;
      if (od <= 0.0) continue;
      const TransistorModel& t = tech_.transistor;
      const double r_unclamped = 1.0 / (t.k_sat_a_per_v2 * od);
      const bool clamped = r_unclamped < t.r_on_min_ohm;
      const double r_ch = clamped ? t.r_on_min_ohm : r_unclamped;
      const double g = 1.0 / (r_ch + variations_[cell.flat].rref_ohm);
      f[cell.ml] -= g * v_ml;
      if (jv != nullptr) {
        jv[cell.s_mm] += jac_scale * (-g);
        if (!clamped && dgate_dvsl != 0.0) {
          const double dg_dgate = g * g * r_ch / od;
          jv[cell.s_ms] += jac_scale * (-v_ml * dg_dgate * dgate_dvsl);
        }
      }
    }
  }

  /// Jacobian-pattern matrix storage shared by the DC and transient solvers.
  SparseMat& system_matrix() { return jac_; }
  const std::vector<int>& diagonal_slots() const { return diag_slots_; }

  /// Direct solve of system_matrix() * x = b. Searchline equations never
  /// involve matchline voltages, so the system is block lower triangular:
  /// per-column and per-row tridiagonal chains coupled one way through the
  /// discharge-branch gate terms. Solved exactly by forward block
  /// substitution with the Thomas algorithm on each chain.
  void solve_block_triangular(const Eigen::VectorXd& b,
                              Eigen::VectorXd& x) const {
    const double* av = jac_.valuePtr();
    const int n = unknown_count();
    x.resize(n);
    for (const Chain& chain : sl_chains_) thomas(chain, av, b, x);
    rhs_scratch_ = b;
    for (const Cell& cell : cells_) {
      rhs_scratch_[cell.ml] -= av[cell.s_ms] * x[cell.sl];
    }
    for (const Chain& chain : ml_chains_) thomas(chain, av, rhs_scratch_, x);
  }

  /// Assembled linear (wire + driver) conductance matrix; row sums equal the
  /// driver terms, i.e. the only conductances to a fixed potential.
  SparseMat linear_conductance(bool ml_drivers_on) const {
    std::vector<Eigen::Triplet<double>> trips;
    for (const Wire& w : wires_) {
      trips.emplace_back(w.a, w.a, w.g);
      trips.emplace_back(w.b, w.b, w.g);
      trips.emplace_back(w.a, w.b, -w.g);
      trips.emplace_back(w.b, w.a, -w.g);
    }
    for (const Driver& d : drivers_) {
      if (d.is_matchline && !ml_drivers_on) continue;
      trips.emplace_back(d.node, d.node, d.g);
    }
    SparseMat g(unknown_count(), unknown_count());
    g.setFromTriplets(trips.begin(), trips.end());
    return g;
  }

  /// Thevenin resistance seen from one unknown into the wire/driver network
  /// with all sources shorted and cell loads ignored.
  double thevenin_resistance(int unknown) {
    SparseMat g = linear_conductance(true);
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(g);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("thevenin_resistance: factorization failed");
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(unknown_count());
    e[unknown] = 1.0;
    return lu.solve(e)[unknown];
  }

  /// Instantaneous power bookkeeping at state v.
  PowerSample power(const Eigen::VectorXd& v, bool ml_drivers_on) const {
    PowerSample p;
    for (const Wire& w : wires_) {
      const double dv = v[w.a] - v[w.b];
      p.dissipated_w += w.g * dv * dv;
    }
    for (const Driver& d : drivers_) {
      if (d.is_matchline && !ml_drivers_on) continue;
      const double i = d.g * (d.source_v - v[d.node]);
      const double sourced = d.source_v * i;
      p.delivered_w += sourced;
      p.dissipated_w += (d.source_v - v[d.node]) * i;
      if (d.is_matchline) {
        p.matchline_driver_w += sourced;
      } else {
        p.searchline_driver_w += sourced;
      }
    }
    const bool sot = tech_.kind == CellKind::Sot;
    for (const Cell& cell : cells_) {
      const double v_sl = v[cell.sl];
      const double v_ml = v[cell.ml];
      double gate = v_sl;
      if (sot) {
        const detail::SotDivider div = detail::solve_sot_divider(
            *tech_.mtj, cell.state.match(), std::max(v_sl, 0.0),
            variations_[cell.flat], cell.gate_cache);
        cell.gate_cache = div.gate_v;
        gate = div.gate_v;
        p.dissipated_w += v_sl * div.current_a;
      } else if (tech_.kind == CellKind::Sram) {
        gate = cell.state.match() ? 0.0 : v_sl;
      }
      const double od = gate - cell.vth_eff;
      if (od <= 0.0) continue;
      const double r_ch = channel_resistance(tech_.transistor, od);
      p.dissipated_w += v_ml * v_ml / (r_ch + variations_[cell.flat].rref_ohm);
    }
    return p;
  }

  /// Sum of discharge currents drawn from one matchline at state v.
  double matchline_discharge_current(const Eigen::VectorXd& v, int row) const {
    double total = 0.0;
    for (const Cell& cell : cells_) {
      if (cell.r != row) continue;
      double gate = v[cell.sl];
      if (tech_.kind == CellKind::Sot) {
        gate = detail::solve_sot_divider(*tech_.mtj, cell.state.match(),
                                         std::max(v[cell.sl], 0.0),
                                         variations_[cell.flat],
                                         cell.gate_cache)
                   .gate_v;
      } else if (tech_.kind == CellKind::Sram && cell.state.match()) {
        gate = 0.0;
      }
      const double od = gate - cell.vth_eff;
      if (od <= 0.0) continue;
      const double r_ch = channel_resistance(tech_.transistor, od);
      total += v[cell.ml] / (r_ch + variations_[cell.flat].rref_ohm);
    }
    return total;
  }

  /// Current sourced by the precharge driver of one row at state v.
  double matchline_driver_current(const Eigen::VectorXd& v, int row) const {
    return (config_.vdd_v - v[ml_node(row, 0)]) / config_.driver_r_ohm;
  }

  /// Total current drawn from one searchline driver at state v.
  double searchline_driver_current(const Eigen::VectorXd& v, int col) const {
    return (config_.vs_v - v[sl_node(0, col)]) / config_.driver_r_ohm;
  }

  // --- DC operating point ---------------------------------------------------

  /// Nonlinear DC solve by damped Newton iteration; matchlines optionally
  /// pinned to vdd through their precharge drivers. Residual target 1 pA.
  Eigen::VectorXd dc_steady_state(bool matchlines_held) {
    constexpr double kResidualA = 1e-12;
    constexpr int kMaxIter = 200;
    constexpr double kGmin = 1e-15;  // keeps floating matchlines well-posed

    const int n = unknown_count();
    Eigen::VectorXd v(n);
    for (int r = 0; r < config_.rows; ++r) {
      for (int c = 0; c < config_.cols; ++c) {
        v[sl_node(r, c)] = config_.vs_v;
        v[ml_node(r, c)] = matchlines_held ? config_.vdd_v : 0.0;
      }
    }

    Eigen::VectorXd f(n), f_try(n), dv(n);
    for (int it = 0; it < kMaxIter; ++it) {
      eval(v, matchlines_held, f, &jac_, -1.0);
      for (int i = 0; i < n; ++i) {
        f[i] -= kGmin * v[i];
        jac_.valuePtr()[diag_slots_[i]] += kGmin;
      }
      const double res = f.lpNorm<Eigen::Infinity>();
      if (res < kResidualA) return v;

      // A = -dI/dv (+gmin); solve A dv = f so that v + dv reduces |I|.
      solve_block_triangular(f, dv);
      double alpha = 1.0;
      for (int bt = 0; bt < 30; ++bt) {
        eval(v + alpha * dv, matchlines_held, f_try);
        for (int i = 0; i < n; ++i) f_try[i] -= kGmin * (v[i] + alpha * dv[i]);
        if (f_try.lpNorm<Eigen::Infinity>() <= (1.0 - 0.25 * alpha) * res ||
            alpha < 1e-6) {
          break;
        }
        alpha *= 0.5;
      }
      v += alpha * dv;
    }
    eval(v, matchlines_held, f);
    throw NumericalError(
        "dc_steady_state: no convergence after 200 iterations, residual " +
        std::to_string(f.lpNorm<Eigen::Infinity>()) + " A");
  }

 private:
  struct Wire {
    int a, b;
    double g;
    int s_aa, s_ab, s_ba, s_bb;
  };
  /// One tridiagonal chain of the block-triangular system.
  struct Chain {
    std::vector<int> nodes;
    std::vector<int> diag;   // slot of A(n_k, n_k)
    std::vector<int> upper;  // slot of A(n_k, n_{k+1})
    std::vector<int> lower;  // slot of A(n_{k+1}, n_k)
  };
  struct Driver {
    int node;
    double source_v;
    double g;
    bool is_matchline;
    int line;  // column for searchline drivers, row for matchline drivers
    int s_nn;
  };
  struct Cell {
    int ml, sl;
    int r, c;
    std::size_t flat;
    CellState state;
    double vth_eff;
    int s_mm, s_ms, s_ss;
    mutable double gate_cache = 0.0;
  };

  std::size_t cell_flat(int r, int c) const {
    return static_cast<std::size_t>(r) * config_.cols + c;
  }

  void build() {
    const int n = unknown_count();
    jac_ = SparseMat();  // invalidate any stale pattern before re-indexing
    labels_.assign(n, {});
    cap_.setZero(n);
    wires_.clear();
    drivers_.clear();
    cells_.clear();

    for (int c = 0; c < config_.cols; ++c) {
      for (int r = 0; r < config_.rows; ++r) {
        labels_[sl_node(r, c)] =
            "sl_c" + std::to_string(c) + "_r" + std::to_string(r);
        labels_[ml_node(r, c)] =
            "ml_r" + std::to_string(r) + "_c" + std::to_string(c);
        cap_[sl_node(r, c)] = config_.wire_c_per_cell_f;
        cap_[ml_node(r, c)] = config_.matchline_c_per_cell_f;
      }
    }

    const double g_wire = 1.0 / config_.wire_r_per_cell_ohm;
    const double g_drv = 1.0 / config_.driver_r_ohm;
    for (int c = 0; c < config_.cols; ++c) {
      drivers_.push_back({sl_node(0, c), config_.vs_v, g_drv, false, c, -1});
      for (int r = 0; r + 1 < config_.rows; ++r) {
        wires_.push_back({sl_node(r, c), sl_node(r + 1, c), g_wire, -1, -1, -1, -1});
      }
    }
    for (int r = 0; r < config_.rows; ++r) {
      drivers_.push_back({ml_node(r, 0), config_.vdd_v, g_drv, true, r, -1});
      for (int c = 0; c + 1 < config_.cols; ++c) {
        wires_.push_back({ml_node(r, c), ml_node(r, c + 1), g_wire, -1, -1, -1, -1});
      }
    }

    rebuild_cells();
    build_pattern();
  }

  void rebuild_cells() {
    cells_.clear();
    cells_.reserve(static_cast<std::size_t>(config_.rows) * config_.cols);
    for (int r = 0; r < config_.rows; ++r) {
      for (int c = 0; c < config_.cols; ++c) {
        Cell cell;
        cell.ml = ml_node(r, c);
        cell.sl = sl_node(r, c);
        cell.r = r;
        cell.c = c;
        cell.flat = cell_flat(r, c);
        cell.state = CellState{stored_(r, c), query_[c]};
        cell.vth_eff = effective_vth(tech_, cell.state, variations_[cell.flat]);
        cell.gate_cache = 0.0;
        cells_.push_back(cell);
      }
    }
    if (jac_.nonZeros() > 0) assign_slots();
  }

  void build_pattern() {
    const int n = unknown_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 5);
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
    for (const Wire& w : wires_) {
      trips.emplace_back(w.a, w.b, 1.0);
      trips.emplace_back(w.b, w.a, 1.0);
    }
    for (const Cell& cell : cells_) {
      trips.emplace_back(cell.ml, cell.sl, 1.0);
    }
    jac_ = SparseMat(n, n);
    jac_.setFromTriplets(trips.begin(), trips.end());
    jac_.makeCompressed();

    diag_slots_.resize(n);
    for (int i = 0; i < n; ++i) diag_slots_[i] = slot(i, i);
    assign_slots();
  }

  int slot(int row, int col) const {
    const int* outer = jac_.outerIndexPtr();
    const int* inner = jac_.innerIndexPtr();
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) {
      throw NumericalError("CircuitNetwork: missing pattern entry");
    }
    return static_cast<int>(it - inner);
  }

  void assign_slots() {
    for (Wire& w : wires_) {
      w.s_aa = slot(w.a, w.a);
      w.s_ab = slot(w.a, w.b);
      w.s_ba = slot(w.b, w.a);
      w.s_bb = slot(w.b, w.b);
    }
    for (Driver& d : drivers_) d.s_nn = slot(d.node, d.node);
    for (Cell& cell : cells_) {
      cell.s_mm = slot(cell.ml, cell.ml);
      cell.s_ms = slot(cell.ml, cell.sl);
      cell.s_ss = slot(cell.sl, cell.sl);
    }
    build_chains();
  }

  void build_chains() {
    sl_chains_.clear();
    ml_chains_.clear();
    for (int c = 0; c < config_.cols; ++c) {
      Chain chain;
      for (int r = 0; r < config_.rows; ++r) chain.nodes.push_back(sl_node(r, c));
      finish_chain(chain);
      sl_chains_.push_back(std::move(chain));
    }
    for (int r = 0; r < config_.rows; ++r) {
      Chain chain;
      for (int c = 0; c < config_.cols; ++c) chain.nodes.push_back(ml_node(r, c));
      finish_chain(chain);
      ml_chains_.push_back(std::move(chain));
    }
    std::size_t longest = 0;
    for (const Chain& chain : sl_chains_) longest = std::max(longest, chain.nodes.size());
    for (const Chain& chain : ml_chains_) longest = std::max(longest, chain.nodes.size());
    thomas_c_.resize(longest);
    thomas_d_.resize(longest);
    rhs_scratch_.resize(unknown_count());
  }

  void finish_chain(Chain& chain) {
    const std::size_t len = chain.nodes.size();
    chain.diag.resize(len);
    chain.upper.resize(len > 0 ? len - 1 : 0);
    chain.lower.resize(len > 0 ? len - 1 : 0);
    for (std::size_t k = 0; k < len; ++k) {
      chain.diag[k] = diag_slots_[chain.nodes[k]];
      if (k + 1 < len) {
        chain.upper[k] = slot(chain.nodes[k], chain.nodes[k + 1]);
        chain.lower[k] = slot(chain.nodes[k + 1], chain.nodes[k]);
      }
    }
  }

  // Thomas elimination on one chain; no pivoting (the assembled matrices are
  // diagonally dominant: positive C/dt or g_min plus passive conductances).
  void thomas(const Chain& chain, const double* av, const Eigen::VectorXd& b,
              Eigen::VectorXd& x) const {
    const std::size_t len = chain.nodes.size();
    double denom = av[chain.diag[0]];
    thomas_c_[0] = len > 1 ? av[chain.upper[0]] / denom : 0.0;
    thomas_d_[0] = b[chain.nodes[0]] / denom;
    for (std::size_t k = 1; k < len; ++k) {
      const double a_low = av[chain.lower[k - 1]];
      denom = av[chain.diag[k]] - a_low * thomas_c_[k - 1];
      if (k + 1 < len) thomas_c_[k] = av[chain.upper[k]] / denom;
      thomas_d_[k] =
          (b[chain.nodes[k]] - a_low * thomas_d_[k - 1]) / denom;
    }
    x[chain.nodes[len - 1]] = thomas_d_[len - 1];
    for (std::size_t k = len - 1; k-- > 0;) {
      x[chain.nodes[k]] = thomas_d_[k] - thomas_c_[k] * x[chain.nodes[k + 1]];
    }
  }

  ArrayConfig config_;
  CellTechnology tech_;
  BitMatrix stored_;
  BitVector query_;
  std::vector<CellVariation> variations_;
  std::vector<int> perm_;
  std::vector<std::string> labels_;
  Eigen::VectorXd cap_;
  std::vector<Wire> wires_;
  std::vector<Driver> drivers_;
  std::vector<Cell> cells_;
  SparseMat jac_;
  std::vector<int> diag_slots_;
  std::vector<Chain> sl_chains_, ml_chains_;
  mutable std::vector<double> thomas_c_, thomas_d_;
  mutable Eigen::VectorXd rhs_scratch_;
};

/// Convenience builder matching the module-level operation name.
inline CircuitNetwork build_network(const ArrayConfig& config,
                                    const CellTechnology& tech,
                                    BitMatrix stored, BitVector query) {
  return CircuitNetwork(config, tech, std::move(stored), std::move(query));
}

}  // namespace camsim
