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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "camsim/errors.hpp"
#include "camsim/rng.hpp"

namespace camsim {

// ---------------------------------------------------------------------------
// Thin-film reference resistor: transfer-length-method characterization.
// ---------------------------------------------------------------------------

/// Width of the measured TLM test structures; contact resistance extracted
/// from them is rescaled by (reference width / device width) when a device
/// of a different width is designed.
inline constexpr double kTlmReferenceWidthUm = 10.0;

struct TlmPoint {
  double spacing_um = 0.0;
  double resistance_ohm = 0.0;
  std::optional<double> bias_v;  ///< Optional measurement bias.
};

/// A set of total-resistance measurements vs. contact spacing at fixed width.
struct TlmDataset {
  double width_um = kTlmReferenceWidthUm;
  std::vector<TlmPoint> points;

  void validate() const {
    if (width_um <= 0.0) {
      throw ValidationError("TlmDataset: width must be positive");
    }
    if (points.size() < 2) {
      throw ValidationError("TlmDataset: at least 2 points required");
    }
    for (const TlmPoint& p : points) {
      if (p.spacing_um <= 0.0 || p.resistance_ohm <= 0.0) {
        throw ValidationError(
            "TlmDataset: spacings and resistances must be positive");
      }
    }
    bool distinct = false;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].spacing_um != points[0].spacing_um) {
        distinct = true;
        break;
      }
    }
    if (!distinct) {
      throw ValidationError(
          "TlmDataset: all spacings identical, fit is degenerate");
    }
  }
};

/// Sheet/contact resistance extracted from a TLM dataset.
struct FilmExtraction {
  double sheet_resistance_ohm_sq = 0.0;
  double contact_resistance_ohm = 0.0;  ///< One-contact value R_c.
  double fit_residual_ohm = 0.0;        ///< RMS residual of the fitted line.
  /// Magnitude of the contact-resistance clamp applied when the fitted
  /// intercept was negative (0 when no clamp was needed).
  double clamp_adjustment_ohm = 0.0;
  bool intercept_clamped = false;
  /// Relative 3-sigma spread of realized resistances (measured film
  /// uniformity); consumed as the default reference-resistor sigma.
  double sigma_fraction = 0.27;
};

/// Least-squares fit of R_total(L) = 2*R_c + (R_sheet / W) * L.
inline FilmExtraction tlm_fit(const TlmDataset& data) {
  data.validate();
  const std::size_t n = data.points.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const TlmPoint& p : data.points) {
    sx += p.spacing_um;
    sy += p.resistance_ohm;
    sxx += p.spacing_um * p.spacing_um;
    sxy += p.spacing_um * p.resistance_ohm;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / static_cast<double>(n);
  if (slope <= 0.0) {
    throw ValidationError("tlm_fit: non-positive fitted slope");
  }

  double ss = 0.0;
  for (const TlmPoint& p : data.points) {
    const double e = p.resistance_ohm - (intercept + slope * p.spacing_um);
    ss += e * e;
  }

  FilmExtraction out;
  out.sheet_resistance_ohm_sq = slope * data.width_um;
  out.fit_residual_ohm = std::sqrt(ss / static_cast<double>(n));
  if (intercept < 0.0) {
    out.contact_resistance_ohm = 0.0;
    out.intercept_clamped = true;
    out.clamp_adjustment_ohm = -intercept;
  } else {
    out.contact_resistance_ohm = 0.5 * intercept;
  }
  return out;
}

/// Resistance of a film resistor of the given geometry. Contact resistance
/// scales inversely with width from the reference test-structure width.
inline double resistance_from_geometry(const FilmExtraction& extraction,
                                       double length_um, double width_um,
                                       int n_contacts = 2) {
  if (length_um <= 0.0 || width_um <= 0.0) {
    throw ValidationError("resistance_from_geometry: non-positive geometry");
  }
  if (n_contacts < 0) {
    throw ValidationError("resistance_from_geometry: negative contact count");
  }
  const double film =
      extraction.sheet_resistance_ohm_sq * (length_um / width_um);
  const double contacts = static_cast<double>(n_contacts) *
                          extraction.contact_resistance_ohm *
                          (kTlmReferenceWidthUm / width_um);
  return film + contacts;
}

/// Parse a TLM dataset from CSV with header `spacing_um,resistance_ohm`
/// (optional third column `bias_v`).
inline TlmDataset load_tlm_csv(const std::string& path, double width_um) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("load_tlm_csv: cannot open " + path);
  }
  TlmDataset data;
  data.width_um = width_um;
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("load_tlm_csv: empty file " + path);
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
  };
  // Strip a UTF-8 BOM if present, then check the header.
  if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) {
    line.erase(0, 3);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "spacing_um" ||
      header[1] != "resistance_ohm") {
    throw ValidationError(
        "load_tlm_csv: expected header spacing_um,resistance_ohm");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() < 2) {
      throw ValidationError("load_tlm_csv: short row at line " +
                            std::to_string(lineno));
    }
    TlmPoint p;
    try {
      p.spacing_um = std::stod(fields[0]);
      p.resistance_ohm = std::stod(fields[1]);
      if (fields.size() > 2 && !fields[2].empty()) {
        p.bias_v = std::stod(fields[2]);
      }
    } catch (const std::exception&) {
      throw ValidationError("load_tlm_csv: bad number at line " +
                            std::to_string(lineno));
    }
    data.points.push_back(p);
  }
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// Magnetic tunnel junction.
// ---------------------------------------------------------------------------

enum class MtjState : std::uint8_t { Parallel, Antiparallel };

/// Circular MTJ with bias-dependent TMR. The antiparallel resistance rolls
/// off as TMR(V) = TMR0 / (1 + (V / V_half)^2), which halves at V_half.
struct MtjModel {
  double diameter_nm = 45.0;
  double ra_ohm_um2 = 2000.0;
  double tmr_zero_bias = 1.2;
  double half_bias_v = 0.5;

  void validate() const {
    if (diameter_nm <= 0.0 || ra_ohm_um2 <= 0.0 || half_bias_v <= 0.0) {
      throw ValidationError("MtjModel: geometry/RA/half-bias must be positive");
    }
    if (tmr_zero_bias < 0.0) {
      throw ValidationError("MtjModel: negative zero-bias TMR");
    }
  }

  double area_um2() const {
    const double r_um = 0.5 * diameter_nm * 1e-3;
    return std::numbers::pi * r_um * r_um;
  }

  double parallel_resistance_ohm() const { return ra_ohm_um2 / area_um2(); }

  double tmr_at_bias(double bias_v) const {
    const double x = bias_v / half_bias_v;
    return tmr_zero_bias / (1.0 + x * x);
  }
};

/// Junction resistance in the given state at the given bias voltage.
/// Parallel resistance is bias-independent; antiparallel degrades with |V|.
inline double mtj_resistance(const MtjModel& model, MtjState state,
                             double bias_v) {
  model.validate();
  const double rp = model.parallel_resistance_ohm();
  if (state == MtjState::Parallel) return rp;
  return rp * (1.0 + model.tmr_at_bias(bias_v));
}

// ---------------------------------------------------------------------------
// FeFET storage element.
// ---------------------------------------------------------------------------

/// FeFET bit storage as a threshold-voltage pair separated by the memory
/// window; the search voltage is placed between the two levels.
struct FefetModel {
  double vth_low_v = 0.36;
  double vth_high_v = 0.82;

  void validate() const {
    if (vth_high_v <= vth_low_v) {
      throw ValidationError("FefetModel: memory window must be positive");
    }
  }

  double memory_window_v() const { return vth_high_v - vth_low_v; }
};

// ---------------------------------------------------------------------------
// Process variation sampling.
// ---------------------------------------------------------------------------

/// Per-cell nominal values subject to variation.
struct DeviceNominals {
  double rref_ohm = 0.0;
  double mtj_r_ohm = 0.0;
  double vth_v = 0.0;
};

/// Quoted spreads are 3-sigma values; per-draw sigma is value / 3.
struct VariationSigmas {
  double rref_fraction_3s = 0.0;  ///< Relative, e.g. 0.27.
  double mtj_fraction_3s = 0.0;   ///< Relative, e.g. 0.15.
  double vth_abs_3s_v = 0.0;      ///< Absolute volts, e.g. 0.042.

  void validate() const {
    if (rref_fraction_3s < 0.0 || mtj_fraction_3s < 0.0 ||
        vth_abs_3s_v < 0.0) {
      throw ValidationError("VariationSigmas: sigmas must be non-negative");
    }
  }

  bool any() const {
    return rref_fraction_3s > 0.0 || mtj_fraction_3s > 0.0 ||
           vth_abs_3s_v > 0.0;
  }
};

namespace detail {

inline double gaussian_positive(double nominal, double sigma, SplitRng& rng) {
  if (sigma <= 0.0 || nominal == 0.0) return nominal;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = nominal + sigma * rng.next_gaussian();
    if (v > 0.0) return v;
  }
  throw NumericalError("sample_device_variation: cannot draw positive value");
}

}  // namespace detail

/// One independent Gaussian draw per parameter; resistances are redrawn until
/// positive. Deterministic for a given rng stream.
inline DeviceNominals sample_device_variation(const DeviceNominals& nominal,
                                              const VariationSigmas& sigmas,
                                              SplitRng& rng) {
  sigmas.validate();
  DeviceNominals out;
  out.rref_ohm = detail::gaussian_positive(
      nominal.rref_ohm, nominal.rref_ohm * sigmas.rref_fraction_3s / 3.0, rng);
  out.mtj_r_ohm = detail::gaussian_positive(
      nominal.mtj_r_ohm, nominal.mtj_r_ohm * sigmas.mtj_fraction_3s / 3.0,
      rng);
  out.vth_v = nominal.vth_v + (sigmas.vth_abs_3s_v / 3.0) * rng.next_gaussian();
  return out;
}

}  // namespace camsim
