// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conserved quantities, phase-space error norms, log-log slope fits and
// envelope growth/damping rates.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/pif.hpp"

namespace parapif {

struct ConservedQuantities {
  double kinetic = 0.0;
  double field_energy = 0.0;
  double field_energy_z = 0.0;
  double total_energy = 0.0;
  Vec3 momentum{};
  double charge_k0_error = 0.0;
};

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace detail

/// `field` must be the solve at `s` (same positions).
inline ConservedQuantities conserved_quantities(const PhaseSpaceState& s, const FieldSolution& field) {
  s.validate();
  const auto& w = s.weights();
  detail::CompensatedSum kin, px, py, pz;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double mw = s.mass * w[j];
    kin.add(0.5 * mw * dot(s.v[j], s.v[j]));
    px.add(mw * s.v[j].x);
    py.add(mw * s.v[j].y);
    pz.add(mw * s.v[j].z);
  }
  ConservedQuantities q;
  q.kinetic = kin.value();
  q.momentum = {px.value(), py.value(), pz.value()};
  q.field_energy = field.field_energy;
  q.field_energy_z = field.field_energy_z;
  q.total_energy = q.kinetic + q.field_energy;
  const double charge = total_charge(s);
  q.charge_k0_error = std::abs(field.measured_charge - charge) / std::abs(charge);
  return q;
}

struct PhaseSpaceError {
  double x = 0.0;
  double v = 0.0;
};

/// err_x = |x_a - x_b|_2 / |x_b|_2 with minimum-image differences,
/// err_v = |v_a - v_b|_2 / |v_b|_2. A zero denominator yields the absolute
/// numerator.
inline PhaseSpaceError relative_error(const PhaseSpaceState& a, const PhaseSpaceState& b, double length) {
  if (a.size() != b.size()) throw ArgumentError("relative_error: particle counts differ");
  double nx = 0.0, dx = 0.0, nv = 0.0, dv = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Vec3 ex = minimum_image(a.x[j] - b.x[j], length);
    const Vec3 ev = a.v[j] - b.v[j];
    nx += dot(ex, ex);
    dx += dot(b.x[j], b.x[j]);
    nv += dot(ev, ev);
    dv += dot(b.v[j], b.v[j]);
  }
  auto ratio = [](double num, double den) { return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num); };
  return {ratio(nx, dx), ratio(nv, dv)};
}

/// Least-squares slope of log(y) against log(x).
inline double fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ArgumentError("fit_power_law: xs and ys differ in length");
  if (xs.size() < 3) throw ArgumentError("fit_power_law: need at least 3 points");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw ArgumentError("fit_power_law: values must be positive");
    sx += std::log(xs[i]);
    sy += std::log(ys[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]) - mx;
    sxx += lx * lx;
    sxy += lx * (std::log(ys[i]) - my);
  }
  if (sxx == 0.0) throw ArgumentError("fit_power_law: xs are all equal");
  return sxy / sxx;
}

inline double fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  return fit_power_law(std::span<const double>(xs), std::span<const double>(ys));
}

/// Least-squares slope of log(y) against t (no peak detection).
inline double log_linear_rate(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 2) throw ArgumentError("log_linear_rate: need at least 2 matching points");
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0.0)) throw ArgumentError("log_linear_rate: values must be positive");
    st += t[i];
    sy += std::log(y[i]);
  }
  const double mt = st / n, my = sy / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (std::log(y[i]) - my);
  }
  return sty / stt;
}

/// Exponential rate of an oscillating energy trace: local maxima inside
/// [t_begin, t_end] are refined by a parabola through log-values and a line
/// is fitted through them. For E ~ exp(2 gamma t) the result is 2 gamma.
inline double damping_rate(std::span<const double> t, std::span<const double> energy, double t_begin, double t_end) {
  if (t.size() != energy.size()) throw ArgumentError("damping_rate: time and energy differ in length");
  std::vector<double> pt, pe;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] < t_begin || t[i] > t_end) continue;
    if (!(energy[i] > energy[i - 1] && energy[i] >= energy[i + 1])) continue;
    if (!(energy[i - 1] > 0.0 && energy[i + 1] > 0.0)) continue;
    const double a = std::log(energy[i - 1]), b = std::log(energy[i]), c = std::log(energy[i + 1]);
    const double denom = a - 2.0 * b + c;
    double off = 0.0, peak = b;
    if (denom < 0.0) {
      off = 0.5 * (a - c) / denom;
      peak = b - 0.25 * (a - c) * off;
    }
    const double dt = 0.5 * (t[i + 1] - t[i - 1]);
    pt.push_back(t[i] + off * dt);
    pe.push_back(std::exp(peak));
  }
  if (pt.size() < 2) throw NumericError("damping_rate: fewer than 2 envelope peaks in the window");
  return log_linear_rate(pt, pe);
}

inline double damping_rate(const std::vector<double>& t, const std::vector<double>& energy, double t_begin,
                           double t_end) {
  return damping_rate(std::span<const double>(t), std::span<const double>(energy), t_begin, t_end);
}

}  // namespace parapif
