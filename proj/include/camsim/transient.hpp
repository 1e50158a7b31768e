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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "camsim/network.hpp"

namespace camsim {

enum class IntegrationMethod : std::uint8_t { BackwardEuler, Trapezoidal };

enum class TraceMode : std::uint8_t { None, SenseNodes, All, Custom };

/// Implicit integrator controls. The circuit couples MOhm-scale discharge
/// paths with fF capacitances next to kOhm drivers, so time constants span
/// several decades; steps are chosen by a local-truncation-error estimate
/// against `tolerance_v`.
struct SimulationSettings {
  IntegrationMethod method = IntegrationMethod::Trapezoidal;
  double dt_initial_s = 1e-12;
  double tolerance_v = 1e-4;
  double t_max_s = 2e-7;
  /// Automatic hold-phase termination: release the matchlines once every
  /// node moves slower than this rate.
  double steady_state_eps_v_per_s = 1e6;
  TraceMode trace = TraceMode::None;
  std::vector<std::string> trace_nodes;  // Custom mode
  int trace_max_samples = 10000;

  void validate() const {
    if (dt_initial_s <= 0.0 || tolerance_v <= 0.0 || t_max_s <= 0.0) {
      throw ValidationError(
          "SimulationSettings: dt_initial, tolerance, t_max must be positive");
    }
    if (steady_state_eps_v_per_s <= 0.0) {
      throw ValidationError("SimulationSettings: steady_state_eps must be > 0");
    }
    if (trace_max_samples < 2) {
      throw ValidationError("SimulationSettings: trace_max_samples < 2");
    }
  }
};

enum class RowOutcome : std::uint8_t { Crossed, NoDischarge, Incomplete };

/// Per-row search observable. `delay_s` counts from the matchline release
/// instant and is meaningful only when outcome == Crossed.
struct RowDelay {
  RowOutcome outcome = RowOutcome::NoDischarge;
  double delay_s = 0.0;
};

struct EnergyBreakdown {
  /// Dissipation during the evaluate phase (searchline drivers, divider
  /// loads, wire and discharge-path losses).
  double search_j = 0.0;
  /// Hold-phase dissipation (prolonged precharge) plus the loss of
  /// recharging the matchlines back to vdd after the search.
  double precharge_j = 0.0;
  double total_j() const { return search_j + precharge_j; }

  // Balance diagnostics over the simulated window (recharge excluded).
  double delivered_j = 0.0;
  double dissipated_j = 0.0;
  double stored_start_j = 0.0;
  double stored_end_j = 0.0;
  double balance_error() const {
    const double lhs = delivered_j;
    const double rhs = dissipated_j + (stored_end_j - stored_start_j);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    return std::abs(lhs - rhs) / scale;
  }
};

struct Trace {
  std::vector<int> nodes;
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<std::vector<double>> samples;  // one row per recorded time
  bool all_nodes = false;
};

struct TransientResult {
  std::vector<RowDelay> rows;
  EnergyBreakdown energy;
  double release_time_s = 0.0;  ///< Matchline release instant.
  double end_time_s = 0.0;
  double precharge_hold_actual_s = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  std::optional<Trace> trace;
};

namespace detail {

class TransientSolver {
 public:
  TransientSolver(CircuitNetwork& net, const SimulationSettings& settings)
      : net_(net), settings_(settings), n_(net.unknown_count()) {
    settings_.validate();
    cap_ = net_.capacitance();
    mismatches_.resize(net_.rows());
    any_active_ = false;
    for (int r = 0; r < net_.rows(); ++r) {
      mismatches_[r] = net_.row_mismatch_count(r);
      any_active_ = any_active_ || mismatches_[r] > 0;
    }
  }

  TransientResult run() {
    TransientResult out;
    v_ = net_.initial_state();
    t_ = 0.0;
    setup_trace(out);

    const bool prolonged =
        net_.config().scheme == PrechargeScheme::ProlongedPre;
    out.energy.stored_start_j = stored_energy(v_);

    if (prolonged) {
      run_phase(/*ml_on=*/true, out);
      out.release_time_s = t_;
      out.precharge_hold_actual_s = t_;
    }
    run_phase(/*ml_on=*/false, out);
    out.end_time_s = t_;

    finalize_rows(out);
    finalize_energy(out);
    return out;
  }

 private:
  // One implicit step from (v_, i_now_) over dt. Returns false when the
  // Newton iteration stalls.
  bool solve_step(double dt, double theta, bool ml_on, Eigen::VectorXd& v1,
                  Eigen::VectorXd& i1) {
    constexpr int kMaxNewton = 15;
    constexpr double kUpdateTolV = 1e-10;
    v1 = v_;
    SparseMat& a = net_.system_matrix();
    for (int it = 0; it < kMaxNewton; ++it) {
      net_.eval(v1, ml_on, i1, &a, -theta);
      double* av = a.valuePtr();
      const std::vector<int>& diag = net_.diagonal_slots();
      for (int i = 0; i < n_; ++i) av[diag[i]] += cap_[i] / dt;

      // rhs = -F where F is the theta-method residual.
      rhs_ = theta * i1 + (1.0 - theta) * i_now_ -
             (cap_.array() * (v1 - v_).array() / dt).matrix();
      net_.solve_block_triangular(rhs_, dv_);
      v1 += dv_;
      if (dv_.lpNorm<Eigen::Infinity>() < kUpdateTolV) {
        net_.eval(v1, ml_on, i1);
        return true;
      }
    }
    return false;
  }

  void run_phase(bool ml_on, TransientResult& out) {
    const bool hold_phase = ml_on;
    const double hold_until = net_.config().precharge_hold_s;
    const bool auto_hold = hold_phase && hold_until <= 0.0;
    const double theta_main =
        settings_.method == IntegrationMethod::Trapezoidal ? 0.5 : 1.0;

    net_.eval(v_, ml_on, i_now_);
    vdot_now_ = (i_now_.array() / cap_.array()).matrix();
    power_now_ = net_.power(v_, ml_on);
    record_trace(out);

    double dt = settings_.dt_initial_s;
    int startup = 4;  // damped first-order steps after each discontinuity
    bool have_history = false;
    double dt_prev = 0.0;
    Eigen::VectorXd vdot_prev;

    while (true) {
      if (t_ >= settings_.t_max_s) return;
      if (hold_phase && !auto_hold && t_ >= hold_until) return;
      if (!hold_phase && any_active_ && all_active_rows_crossed()) return;

      double dt_eff = std::min(dt, settings_.t_max_s - t_);
      if (hold_phase && !auto_hold) dt_eff = std::min(dt_eff, hold_until - t_);
      if (dt_eff < 1e-21) {
        t_ += dt_eff;
        return;
      }

      const double theta = startup > 0 ? 1.0 : theta_main;
      const int order = theta == 1.0 ? 1 : 2;
      if (!solve_step(dt_eff, theta, ml_on, v_try_, i_try_)) {
        dt = dt_eff * 0.3;
        ++out.rejected_steps;
        if (dt < 1e-21) {
          throw NumericalError(
              "simulate_search: step-size underflow (stiffness) at t=" +
              std::to_string(t_));
        }
        continue;
      }

      vdot_try_ = (i_try_.array() / cap_.array()).matrix();
      double err;
      if (order == 1 || !have_history) {
        err = 0.5 * dt_eff *
              (vdot_try_ - vdot_now_).lpNorm<Eigen::Infinity>();
      } else {
        // Second-difference estimate of the trapezoidal truncation error.
        const Eigen::VectorXd acc1 = (vdot_try_ - vdot_now_) / dt_eff;
        const Eigen::VectorXd acc0 = (vdot_now_ - vdot_prev) / dt_prev;
        err = (dt_eff * dt_eff / 12.0) * (acc1 - acc0).lpNorm<Eigen::Infinity>();
      }

      if (err > settings_.tolerance_v) {
        ++out.rejected_steps;
        const double shrink = std::max(
            0.1, 0.8 * std::pow(settings_.tolerance_v / err,
                                1.0 / (order + 1)));
        dt = dt_eff * std::min(0.9, shrink);
        if (dt < 1e-21) {
          throw NumericalError(
              "simulate_search: step-size underflow (stiffness) at t=" +
              std::to_string(t_));
        }
        continue;
      }

      // Accepted.
      const double t0 = t_;
      t_ += dt_eff;
      ++out.accepted_steps;
      if (startup > 0) --startup;

      if (!hold_phase) detect_crossings(t0, dt_eff, out);
      accumulate_energy(dt_eff, ml_on, out);

      dt_prev = dt_eff;
      vdot_prev = vdot_now_;
      have_history = true;

      // Step-averaged node rates; immune to the instantaneous-derivative
      // noise of barely-excited stiff modes.
      const double max_rate =
          (v_try_ - v_).lpNorm<Eigen::Infinity>() / dt_eff;

      v_ = v_try_;
      i_now_ = i_try_;
      vdot_now_ = vdot_try_;
      record_trace(out);

      // Settling-terminated phases: the automatic hold, and an evaluate
      // phase in which no row can ever cross (all-match search).
      const bool settling_phase =
          (hold_phase && auto_hold) || (!hold_phase && !any_active_);
      if (settling_phase && max_rate < settings_.steady_state_eps_v_per_s) {
        return;
      }

      const double grow =
          0.85 * std::pow(settings_.tolerance_v / std::max(err, 1e-300),
                          1.0 / (order + 1));
      dt = dt_eff * std::clamp(grow, 0.3, 2.5);
      dt = std::min(dt, settings_.t_max_s / 10.0);
    }
  }

  bool all_active_rows_crossed() const {
    for (int r = 0; r < net_.rows(); ++r) {
      if (mismatches_[r] > 0 && crossing_[r] < 0.0) return false;
    }
    return true;
  }

  void detect_crossings(double t0, double dt, TransientResult& out) {
    const double th = net_.config().resolved_sense_threshold_v();
    for (int r = 0; r < net_.rows(); ++r) {
      if (crossing_[r] >= 0.0) continue;
      const int node = net_.sense_node(r);
      const double v0 = v_[node];
      const double v1 = v_try_[node];
      if (v0 >= th && v1 < th) {
        const double frac = (v0 - th) / (v0 - v1);
        crossing_[r] = t0 + frac * dt;
      }
    }
    (void)out;
  }

  void accumulate_energy(double dt, bool ml_on, TransientResult& out) {
    const PowerSample p1 = net_.power(v_try_, ml_on);
    const double delivered = 0.5 * (power_now_.delivered_w + p1.delivered_w);
    const double dissipated = 0.5 * (power_now_.dissipated_w + p1.dissipated_w);
    out.energy.delivered_j += delivered * dt;
    out.energy.dissipated_j += dissipated * dt;
    if (ml_on) {
      out.energy.precharge_j += dissipated * dt;
    } else {
      out.energy.search_j += dissipated * dt;
    }
    power_now_ = p1;
  }

  double stored_energy(const Eigen::VectorXd& v) const {
    return 0.5 * (cap_.array() * v.array() * v.array()).sum();
  }

  void finalize_rows(TransientResult& out) const {
    out.rows.resize(net_.rows());
    for (int r = 0; r < net_.rows(); ++r) {
      if (crossing_[r] >= 0.0) {
        out.rows[r].outcome = RowOutcome::Crossed;
        out.rows[r].delay_s = crossing_[r] - out.release_time_s;
      } else if (mismatches_[r] == 0) {
        out.rows[r].outcome = RowOutcome::NoDischarge;
      } else {
        out.rows[r].outcome = RowOutcome::Incomplete;
      }
    }
  }

  void finalize_energy(TransientResult& out) const {
    out.energy.stored_end_j = stored_energy(v_);
    // Restoring each matchline to vdd through its driver dissipates
    // C dV^2 / 2; booked against the precharge budget.
    const double vdd = net_.config().vdd_v;
    double recharge = 0.0;
    for (int r = 0; r < net_.rows(); ++r) {
      for (int c = 0; c < net_.cols(); ++c) {
        const int node = net_.ml_node(r, c);
        const double dv = vdd - v_[node];
        recharge += 0.5 * cap_[node] * dv * dv;
      }
    }
    out.energy.precharge_j += recharge;
  }

  void setup_trace(TransientResult& out) {
    crossing_.assign(net_.rows(), -1.0);
    if (settings_.trace == TraceMode::None) return;
    Trace tr;
    if (settings_.trace == TraceMode::All) {
      tr.all_nodes = true;
      for (int i = 0; i < n_; ++i) {
        tr.nodes.push_back(i);
        tr.labels.push_back(net_.node_label(i));
      }
    } else if (settings_.trace == TraceMode::SenseNodes) {
      for (int r = 0; r < net_.rows(); ++r) {
        tr.nodes.push_back(net_.sense_node(r));
        tr.labels.push_back(net_.node_label(net_.sense_node(r)));
      }
      for (int c = 0; c < net_.cols(); ++c) {
        const int far = net_.sl_node(net_.rows() - 1, c);
        tr.nodes.push_back(far);
        tr.labels.push_back(net_.node_label(far));
      }
    } else {
      for (const std::string& label : settings_.trace_nodes) {
        bool found = false;
        for (int i = 0; i < n_; ++i) {
          if (net_.node_label(i) == label) {
            tr.nodes.push_back(i);
            tr.labels.push_back(label);
            found = true;
            break;
          }
        }
        if (!found) {
          throw ValidationError("simulate_search: unknown trace node " + label);
        }
      }
    }
    out.trace = std::move(tr);
    trace_stride_ = 1;
    trace_counter_ = 0;
  }

  void record_trace(TransientResult& out) {
    if (!out.trace) return;
    if (trace_counter_++ % trace_stride_ != 0) return;
    Trace& tr = *out.trace;
    tr.times.push_back(t_);
    std::vector<double> row(tr.nodes.size());
    for (std::size_t k = 0; k < tr.nodes.size(); ++k) row[k] = v_[tr.nodes[k]];
    tr.samples.push_back(std::move(row));
    if (static_cast<int>(tr.times.size()) > settings_.trace_max_samples) {
      // Thin by two and double the stride; keeps the buffer bounded.
      std::size_t w = 0;
      for (std::size_t k = 0; k < tr.times.size(); k += 2, ++w) {
        tr.times[w] = tr.times[k];
        tr.samples[w] = std::move(tr.samples[k]);
      }
      tr.times.resize(w);
      tr.samples.resize(w);
      trace_stride_ *= 2;
    }
  }

  CircuitNetwork& net_;
  SimulationSettings settings_;
  int n_;
  Eigen::VectorXd cap_;
  Eigen::VectorXd v_, v_try_, i_now_, i_try_, vdot_now_, vdot_try_;
  Eigen::VectorXd rhs_, dv_;
  PowerSample power_now_;
  std::vector<double> crossing_;
  std::vector<int> mismatches_;
  bool any_active_ = false;
  double t_ = 0.0;
  int trace_stride_ = 1;
  long trace_counter_ = 0;
};

}  // namespace detail

/// Run the two-phase search operation on an assembled network and extract
/// per-row discharge delays and the energy budget.
///
/// Standard scheme: searchlines step to their drive values and matchlines
/// are released at t=0. Prolonged precharge: matchlines stay pinned through
/// their drivers until the array settles (or for the configured hold time),
/// then release; delays count from the release instant.
inline TransientResult simulate_search(CircuitNetwork& network,
                                       const SimulationSettings& settings) {
  return detail::TransientSolver(network, settings).run();
}

/// Recompute the energy budget from a full (all-node) voltage trace by
/// trapezoidal integration; independent cross-check of the accounting done
/// during time stepping.
inline EnergyBreakdown extract_energy(CircuitNetwork& network,
                                      const TransientResult& result) {
  if (!result.trace || !result.trace->all_nodes) {
    throw ValidationError("extract_energy: requires an all-node trace");
  }
  const Trace& tr = *result.trace;
  EnergyBreakdown e;
  const int n = network.unknown_count();
  Eigen::VectorXd v(n);
  const Eigen::VectorXd& cap = network.capacitance();

  auto load = [&](std::size_t k, Eigen::VectorXd& dst) {
    for (int i = 0; i < n; ++i) dst[i] = tr.samples[k][i];
  };

  Eigen::VectorXd v_prev(n);
  load(0, v_prev);
  e.stored_start_j =
      0.5 * (cap.array() * v_prev.array() * v_prev.array()).sum();
  bool prev_ml_on = result.release_time_s > 0.0;
  PowerSample prev = network.power(v_prev, prev_ml_on);
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double dt = tr.times[k] - tr.times[k - 1];
    // The hold phase ends exactly at the release sample; the driver state of
    // a segment is constant, so re-evaluate the segment-start power when it
    // changes.
    const bool ml_on = tr.times[k] <= result.release_time_s &&
                       result.release_time_s > 0.0;
    if (ml_on != prev_ml_on) {
      prev = network.power(v_prev, ml_on);
      prev_ml_on = ml_on;
    }
    load(k, v);
    const PowerSample cur = network.power(v, ml_on);
    const double dissipated = 0.5 * (prev.dissipated_w + cur.dissipated_w) * dt;
    e.delivered_j += 0.5 * (prev.delivered_w + cur.delivered_w) * dt;
    e.dissipated_j += dissipated;
    if (ml_on) {
      e.precharge_j += dissipated;
    } else {
      e.search_j += dissipated;
    }
    prev = cur;
    v_prev.swap(v);
  }
  // v_prev now holds the final recorded state.
  e.stored_end_j =
      0.5 * (cap.array() * v_prev.array() * v_prev.array()).sum();
  const double vdd = network.config().vdd_v;
  for (int r = 0; r < network.rows(); ++r) {
    for (int c = 0; c < network.cols(); ++c) {
      const int node = network.ml_node(r, c);
      const double dv = vdd - v_prev[node];
      e.precharge_j += 0.5 * cap[node] * dv * dv;
    }
  }
  return e;
}

}  // namespace camsim
