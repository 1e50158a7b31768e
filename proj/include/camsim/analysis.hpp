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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "camsim/transient.hpp"

namespace camsim {

enum class ColumnPlacement : std::uint8_t { Random, Contiguous };
enum class CornerMode : std::uint8_t { MinMax, ThreeSigma };
enum class McRowStrategy : std::uint8_t { Cycle, Fixed };

/// Discharge delays observed for one Hamming distance, across row positions
/// and/or Monte Carlo trials.
struct DelayPopulation {
  int hdist = 0;
  std::vector<double> samples;
  /// Sample position of each delay: (trial, row) pairs aligned with samples.
  std::vector<std::pair<int, int>> origins;
  /// (trial, row) of rows that never discharged / did not finish by t_max.
  std::vector<std::pair<int, int>> no_discharge_origins;
  std::vector<std::pair<int, int>> incomplete_origins;
  double fitted_mean = 0.0;
  double fitted_sigma = 0.0;

  bool statistical() const { return hdist >= 1 && !samples.empty(); }

  void fit() {
    fitted_mean = 0.0;
    fitted_sigma = 0.0;
    const std::size_t n = samples.size();
    if (n == 0) return;
    for (double s : samples) fitted_mean += s;
    fitted_mean /= static_cast<double>(n);
    if (n < 2) return;
    double ss = 0.0;
    for (double s : samples) {
      const double d = s - fitted_mean;
      ss += d * d;
    }
    fitted_sigma = std::sqrt(ss / static_cast<double>(n - 1));
  }

  double lower_bound(CornerMode mode) const {
    if (mode == CornerMode::ThreeSigma) return fitted_mean - 3.0 * fitted_sigma;
    return *std::min_element(samples.begin(), samples.end());
  }
  double upper_bound(CornerMode mode) const {
    // Rows still mid-discharge at t_max have unknown (larger) delays.
    if (!incomplete_origins.empty()) {
      return std::numeric_limits<double>::infinity();
    }
    if (mode == CornerMode::ThreeSigma) return fitted_mean + 3.0 * fitted_sigma;
    return *std::max_element(samples.begin(), samples.end());
  }
};

struct MddEntry {
  int hdist = 0;
  std::optional<int> mdd;  ///< Empty = unresolvable within the swept range.
};

struct MddReport {
  CornerMode mode = CornerMode::MinMax;
  std::vector<MddEntry> per_hdist;
  /// Largest resolvable MDD over the sweep; empty when any entry was
  /// unresolvable.
  std::optional<int> worst_case;
};

/// Minimum detectable distance per Hamming distance: the smallest increment
/// whose delay population is entirely faster than this one. Separation is
/// strict; touching intervals do not resolve.
inline MddReport compute_mdd(const std::vector<DelayPopulation>& populations,
                             CornerMode mode) {
  std::vector<const DelayPopulation*> pops;
  for (const DelayPopulation& p : populations) {
    if (p.statistical()) pops.push_back(&p);
  }
  if (pops.size() < 2) {
    throw ValidationError("compute_mdd: need at least 2 populated HDists");
  }
  std::sort(pops.begin(), pops.end(),
            [](const DelayPopulation* a, const DelayPopulation* b) {
              return a->hdist < b->hdist;
            });
  for (std::size_t i = 1; i < pops.size(); ++i) {
    if (pops[i]->hdist != pops[i - 1]->hdist + 1) {
      throw ValidationError("compute_mdd: HDist range is not contiguous");
    }
  }

  MddReport report;
  report.mode = mode;
  bool all_resolved = true;
  int worst = 1;
  for (std::size_t i = 0; i + 1 < pops.size(); ++i) {
    const double lower = pops[i]->lower_bound(mode);
    MddEntry entry;
    entry.hdist = pops[i]->hdist;
    for (std::size_t j = i + 1; j < pops.size(); ++j) {
      if (pops[j]->upper_bound(mode) < lower) {
        entry.mdd = pops[j]->hdist - pops[i]->hdist;
        break;
      }
    }
    if (entry.mdd) {
      worst = std::max(worst, *entry.mdd);
    } else {
      all_resolved = false;
    }
    report.per_hdist.push_back(entry);
  }
  if (all_resolved) report.worst_case = worst;
  return report;
}

namespace detail {

inline void run_parallel(int n_items, int jobs,
                         const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n_items));
  if (jobs == 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::future<void>> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.push_back(std::async(std::launch::async, [&]() {
      for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) {
        fn(i);
      }
    }));
  }
  for (auto& f : workers) f.get();
}

inline BitVector make_query(int cols, std::uint64_t seed, int hdist,
                            int trial) {
  SplitRng rng =
      SplitRng::derive(seed, {stream_tag("query"),
                              static_cast<std::uint64_t>(hdist),
                              static_cast<std::uint64_t>(trial)});
  BitVector q(cols);
  for (int c = 0; c < cols; ++c) q[c] = rng.next_bool() ? 1 : 0;
  return q;
}

/// Stored matrix in which every row realizes `hdist` mismatches against the
/// query; mismatching columns are drawn per row (Random) or packed at the
/// driver edge (Contiguous).
inline BitMatrix make_stored(const BitVector& query, int rows, int hdist,
                             ColumnPlacement placement, std::uint64_t seed,
                             int trial) {
  const int cols = static_cast<int>(query.size());
  if (hdist < 0 || hdist > cols) {
    throw ValidationError("make_stored: hdist outside [0, cols]");
  }
  BitMatrix stored(rows, cols);
  std::vector<int> order(cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      stored.set(r, c, query[c]);
      order[c] = c;
    }
    if (placement == ColumnPlacement::Random) {
      SplitRng rng = SplitRng::derive(
          seed, {stream_tag("cols"), static_cast<std::uint64_t>(hdist),
                 static_cast<std::uint64_t>(trial),
                 static_cast<std::uint64_t>(r)});
      for (int k = 0; k < hdist; ++k) {
        const int pick =
            k + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cols - k)));
        std::swap(order[k], order[pick]);
      }
    }
    for (int k = 0; k < hdist; ++k) {
      const int c = order[k];
      stored.set(r, c, query[c] ^ 1u);
    }
  }
  return stored;
}

inline CellVariation sample_cell_variation(const CellTechnology& tech,
                                           const VariationSigmas& sigmas,
                                           SplitRng& rng) {
  DeviceNominals nominal;
  nominal.rref_ohm = tech.rref_ohm;
  nominal.mtj_r_ohm = tech.mtj ? tech.mtj->parallel_resistance_ohm() : 0.0;
  nominal.vth_v = tech.kind == CellKind::Fefet ? tech.fefet->vth_low_v
                                               : tech.transistor.vth_v;
  const DeviceNominals draw = sample_device_variation(nominal, sigmas, rng);
  CellVariation var;
  var.rref_ohm = draw.rref_ohm;
  var.vth_shift_v = draw.vth_v - nominal.vth_v;
  if (tech.mtj) {
    var.mtj_scale_hi = draw.mtj_r_ohm / nominal.mtj_r_ohm;
    var.mtj_scale_lo =
        gaussian_positive(1.0, sigmas.mtj_fraction_3s / 3.0, rng);
  }
  return var;
}

inline std::vector<CellVariation> sample_array_variations(
    const CellTechnology& tech, const VariationSigmas& sigmas, int rows,
    int cols, std::uint64_t seed, int trial) {
  std::vector<CellVariation> vars;
  vars.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      SplitRng rng = SplitRng::derive(
          seed, {stream_tag("var"), static_cast<std::uint64_t>(trial),
                 static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)});
      vars.push_back(sample_cell_variation(tech, sigmas, rng));
    }
  }
  return vars;
}

}  // namespace detail

struct SweepOptions {
  ColumnPlacement placement = ColumnPlacement::Random;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// Delay populations over a set of Hamming distances. Every row of the array
/// realizes the same HDist, so one transient yields the delay at every row
/// position, nearest through farthest from the drivers.
inline std::vector<DelayPopulation> sweep_hdist(
    const ArrayConfig& config, const CellTechnology& tech,
    const SimulationSettings& sim, const std::vector<int>& hdist_set,
    const SweepOptions& options = {}) {
  for (int h : hdist_set) {
    if (h < 0 || h > config.cols) {
      throw ValidationError("sweep_hdist: hdist outside [0, cols]");
    }
  }
  std::vector<DelayPopulation> populations(hdist_set.size());
  detail::run_parallel(
      static_cast<int>(hdist_set.size()), options.jobs, [&](int i) {
        const int h = hdist_set[i];
        try {
        const BitVector query =
            detail::make_query(config.cols, options.seed, h, 0);
        CircuitNetwork net(
            config, tech,
            detail::make_stored(query, config.rows, h, options.placement,
                                options.seed, 0),
            query);
        const TransientResult result = simulate_search(net, sim);
        DelayPopulation pop;
        pop.hdist = h;
        for (int r = 0; r < config.rows; ++r) {
          switch (result.rows[r].outcome) {
            case RowOutcome::Crossed:
              pop.samples.push_back(result.rows[r].delay_s);
              pop.origins.emplace_back(0, r);
              break;
            case RowOutcome::NoDischarge:
              pop.no_discharge_origins.emplace_back(0, r);
              break;
            case RowOutcome::Incomplete:
              pop.incomplete_origins.emplace_back(0, r);
              break;
          }
        }
        pop.fit();
        populations[i] = std::move(pop);
        } catch (const NumericalError& e) {
          throw NumericalError("sweep_hdist at (hdist=" + std::to_string(h) +
                               ", trial=0): " + e.what());
        }
      });
  std::sort(populations.begin(), populations.end(),
            [](const DelayPopulation& a, const DelayPopulation& b) {
              return a.hdist < b.hdist;
            });
  return populations;
}

struct MonteCarloOptions {
  int n_trials = 100;
  VariationSigmas sigmas;
  std::uint64_t seed = 1;
  ColumnPlacement placement = ColumnPlacement::Random;
  McRowStrategy row_strategy = McRowStrategy::Cycle;
  int fixed_row = 0;
  int jobs = 1;
};

/// Monte Carlo delay populations: per trial, every cell's device parameters
/// are redrawn, the network is rebuilt and one search is simulated; the test
/// row's delay is recorded. Stored words stay fixed across trials (only the
/// devices vary), so zero sigmas reduce every trial to the nominal case.
/// The test row walks the array (Cycle) so the population also carries
/// position-induced spread, or stays put (Fixed).
inline std::vector<DelayPopulation> monte_carlo_study(
    const ArrayConfig& config, const CellTechnology& tech,
    const SimulationSettings& sim, const std::vector<int>& hdist_set,
    const MonteCarloOptions& options) {
  if (options.n_trials < 2) {
    throw ValidationError("monte_carlo_study: n_trials must be >= 2");
  }
  options.sigmas.validate();
  for (int h : hdist_set) {
    if (h < 0 || h > config.cols) {
      throw ValidationError("monte_carlo_study: hdist outside [0, cols]");
    }
  }

  const int n_h = static_cast<int>(hdist_set.size());
  const int n_items = n_h * options.n_trials;
  struct Slot {
    RowOutcome outcome = RowOutcome::NoDischarge;
    double delay = 0.0;
    int row = 0;
  };
  std::vector<Slot> slots(n_items);

  detail::run_parallel(n_items, options.jobs, [&](int item) {
    const int hi = item / options.n_trials;
    const int trial = item % options.n_trials;
    const int h = hdist_set[hi];
    const int test_row = options.row_strategy == McRowStrategy::Cycle
                             ? trial % config.rows
                             : options.fixed_row;
    try {
      const BitVector query =
          detail::make_query(config.cols, options.seed, h, 0);
      CircuitNetwork net(config, tech,
                         detail::make_stored(query, config.rows, h,
                                             options.placement, options.seed,
                                             0),
                         query);
      net.set_all_variations(detail::sample_array_variations(
          tech, options.sigmas, config.rows, config.cols, options.seed,
          trial));
      const TransientResult result = simulate_search(net, sim);
      slots[item] = Slot{result.rows[test_row].outcome,
                         result.rows[test_row].delay_s, test_row};
    } catch (const NumericalError& e) {
      throw NumericalError("monte_carlo_study at (hdist=" + std::to_string(h) +
                           ", trial=" + std::to_string(trial) +
                           ", row=" + std::to_string(test_row) +
                           "): " + e.what());
    }
  });

  std::vector<DelayPopulation> populations(n_h);
  for (int hi = 0; hi < n_h; ++hi) {
    DelayPopulation& pop = populations[hi];
    pop.hdist = hdist_set[hi];
    for (int trial = 0; trial < options.n_trials; ++trial) {
      const Slot& s = slots[hi * options.n_trials + trial];
      switch (s.outcome) {
        case RowOutcome::Crossed:
          pop.samples.push_back(s.delay);
          pop.origins.emplace_back(trial, s.row);
          break;
        case RowOutcome::NoDischarge:
          pop.no_discharge_origins.emplace_back(trial, s.row);
          break;
        case RowOutcome::Incomplete:
          pop.incomplete_origins.emplace_back(trial, s.row);
          break;
      }
    }
    pop.fit();
  }
  std::sort(populations.begin(), populations.end(),
            [](const DelayPopulation& a, const DelayPopulation& b) {
              return a.hdist < b.hdist;
            });
  return populations;
}

/// One design under comparison: a cell technology plus its search scheme.
struct DesignSpec {
  std::string name;
  CellTechnology tech;
  PrechargeScheme scheme = PrechargeScheme::Standard;
  /// Hold duration for ProlongedPre designs; 0 = automatic detection.
  double precharge_hold_s = 0.0;
};

struct ComparisonRow {
  std::string name;
  double delay_s = 0.0;
  double energy_j = 0.0;
  double delay_ratio = 1.0;
  double energy_ratio = 1.0;
};

/// Search delay and energy of several designs at one reference HDist, with
/// ratios relative to the first entry. All designs see identical stored
/// words, query and array geometry.
inline std::vector<ComparisonRow> compare_designs(
    const ArrayConfig& base_config, const std::vector<DesignSpec>& designs,
    const SimulationSettings& sim, int reference_hdist,
    const SweepOptions& options = {}) {
  if (designs.empty()) {
    throw ValidationError("compare_designs: no designs given");
  }
  if (reference_hdist < 1 || reference_hdist > base_config.cols) {
    throw ValidationError("compare_designs: reference hdist outside [1, cols]");
  }
  const BitVector query =
      detail::make_query(base_config.cols, options.seed, reference_hdist, 0);
  const BitMatrix stored =
      detail::make_stored(query, base_config.rows, reference_hdist,
                          options.placement, options.seed, 0);

  std::vector<ComparisonRow> rows(designs.size());
  detail::run_parallel(
      static_cast<int>(designs.size()), options.jobs, [&](int i) {
        ArrayConfig cfg = base_config;
        cfg.scheme = designs[i].scheme;
        cfg.precharge_hold_s = designs[i].precharge_hold_s;
        CircuitNetwork net(cfg, designs[i].tech, stored, query);
        const TransientResult result = simulate_search(net, sim);
        double sum = 0.0;
        int n = 0;
        for (const RowDelay& rd : result.rows) {
          if (rd.outcome == RowOutcome::Crossed) {
            sum += rd.delay_s;
            ++n;
          }
        }
        if (n == 0) {
          throw NumericalError("compare_designs: no row discharged for " +
                               designs[i].name);
        }
        rows[i].name = designs[i].name;
        rows[i].delay_s = sum / n;
        rows[i].energy_j = result.energy.total_j();
      });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].delay_ratio = rows[i].delay_s / rows[0].delay_s;
    rows[i].energy_ratio = rows[i].energy_j / rows[0].energy_j;
  }
  return rows;
}

}  // namespace camsim
