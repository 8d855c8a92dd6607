// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact nonuniform discrete Fourier transforms in 3D.
//
//   type 1:  c_k = (1/L^3) sum_j s_j exp(-i k.x_j)      (points -> modes)
//   type 2:  u_j =         sum_k c_k exp(+i k.x_j)      (modes -> points)
//
// The exponentials factor per dimension, so each particle needs only 3N
// complex exponentials followed by an N^3 tensor-product sweep. Summation
// order over particles is fixed, which keeps results run-to-run identical.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/spectrum.hpp"

namespace parapif {

namespace detail {

inline void check_points(std::span<const Vec3> points, double length) {
  for (const auto& p : points) {
    for (std::size_t d = 0; d < 3; ++d) {
      if (!(p[d] >= 0.0 && p[d] <= length)) throw ArgumentError("nonuniform point outside [0, L)^3");
    }
  }
}

/// Fills re/im with exp(sign * i * n * theta) for n = -N/2 .. N/2-1.
/// Powers are built outward from n = 0, so the recurrence depth is N/2.
inline void mode_exponentials(double theta, int n, int sign, double* re, double* im) {
  const int h = n / 2;
  const double br = std::cos(theta);
  const double bi = sign * std::sin(theta);
  re[h] = 1.0;
  im[h] = 0.0;
  for (int s = 1; s < h; ++s) {  // positive n
    const double pr = re[h + s - 1], pi = im[h + s - 1];
    re[h + s] = pr * br - pi * bi;
    im[h + s] = pr * bi + pi * br;
  }
  for (int s = 1; s <= h; ++s) {  // negative n
    const double pr = re[h - s + 1], pi = im[h - s + 1];
    re[h - s] = pr * br + pi * bi;
    im[h - s] = pi * br - pr * bi;
  }
}

struct AxisTables {
  std::vector<double> re, im;
  explicit AxisTables(int n) : re(3 * static_cast<std::size_t>(n)), im(3 * static_cast<std::size_t>(n)) {}
  void fill(const Vec3& x, double k_unit, int n, int sign) {
    for (std::size_t d = 0; d < 3; ++d) mode_exponentials(k_unit * x[d], n, sign, re.data() + d * n, im.data() + d * n);
  }
};

}  // namespace detail

/// Exact type-1 transform. Strengths may be real or complex.
template <class T>
FieldSpectrum nudft_type1(std::span<const Vec3> points, std::span<const T> strengths, const ModeSet& modes) {
  static_assert(std::is_same_v<T, double> || std::is_same_v<T, cplx>);
  if (points.size() != strengths.size()) throw ArgumentError("nudft_type1: points and strengths differ in length");
  detail::check_points(points, modes.length());
  const int n = modes.per_dim();
  const std::size_t nm = modes.size();
  std::vector<double> acc_re(nm, 0.0), acc_im(nm, 0.0);
  detail::AxisTables tab(n);
  const double* ex_r = tab.re.data();
  const double* ex_i = tab.im.data();
  const double* ey_r = ex_r + n;
  const double* ey_i = ex_i + n;
  const double* ez_r = ex_r + 2 * n;
  const double* ez_i = ex_i + 2 * n;

  for (std::size_t j = 0; j < points.size(); ++j) {
    tab.fill(points[j], modes.k_unit(), n, -1);
    double sr = 0.0, si = 0.0;
    if constexpr (std::is_same_v<T, double>) {
      sr = strengths[j];
    } else {
      sr = strengths[j].real();
      si = strengths[j].imag();
    }
    for (int ix = 0; ix < n; ++ix) {
      const double ar = sr * ex_r[ix] - si * ex_i[ix];
      const double ai = sr * ex_i[ix] + si * ex_r[ix];
      for (int iy = 0; iy < n; ++iy) {
        const double br = ar * ey_r[iy] - ai * ey_i[iy];
        const double bi = ar * ey_i[iy] + ai * ey_r[iy];
        double* rr = acc_re.data() + (static_cast<std::size_t>(ix) * n + iy) * n;
        double* ri = acc_im.data() + (static_cast<std::size_t>(ix) * n + iy) * n;
        for (int iz = 0; iz < n; ++iz) {
          rr[iz] += br * ez_r[iz] - bi * ez_i[iz];
          ri[iz] += br * ez_i[iz] + bi * ez_r[iz];
        }
      }
    }
  }

  FieldSpectrum out(modes);
  const double scale = 1.0 / (modes.length() * modes.length() * modes.length());
  for (std::size_t f = 0; f < nm; ++f) out.coeffs[f] = {acc_re[f] * scale, acc_im[f] * scale};
  return out;
}

template <class T>
FieldSpectrum nudft_type1(const std::vector<Vec3>& points, const std::vector<T>& strengths, const ModeSet& modes) {
  return nudft_type1<T>(std::span<const Vec3>(points), std::span<const T>(strengths), modes);
}

/// Exact type-2 transform.
inline std::vector<cplx> nudft_type2(const FieldSpectrum& spectrum, std::span<const Vec3> points) {
  const ModeSet& modes = spectrum.modes;
  detail::check_points(points, modes.length());
  const int n = modes.per_dim();
  std::vector<double> c_re(modes.size()), c_im(modes.size());
  for (std::size_t f = 0; f < modes.size(); ++f) {
    c_re[f] = spectrum.coeffs[f].real();
    c_im[f] = spectrum.coeffs[f].imag();
  }
  detail::AxisTables tab(n);
  const double* ex_r = tab.re.data();
  const double* ex_i = tab.im.data();
  const double* ey_r = ex_r + n;
  const double* ey_i = ex_i + n;
  const double* ez_r = ex_r + 2 * n;
  const double* ez_i = ex_i + 2 * n;

  std::vector<cplx> out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    tab.fill(points[j], modes.k_unit(), n, +1);
    double ur = 0.0, ui = 0.0;
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        const double ar = ex_r[ix] * ey_r[iy] - ex_i[ix] * ey_i[iy];
        const double ai = ex_r[ix] * ey_i[iy] + ex_i[ix] * ey_r[iy];
        const double* cr = c_re.data() + (static_cast<std::size_t>(ix) * n + iy) * n;
        const double* ci = c_im.data() + (static_cast<std::size_t>(ix) * n + iy) * n;
        double tr = 0.0, ti = 0.0;
        for (int iz = 0; iz < n; ++iz) {
          tr += cr[iz] * ez_r[iz] - ci[iz] * ez_i[iz];
          ti += cr[iz] * ez_i[iz] + ci[iz] * ez_r[iz];
        }
        ur += ar * tr - ai * ti;
        ui += ar * ti + ai * tr;
      }
    }
    out[j] = {ur, ui};
  }
  return out;
}

inline std::vector<cplx> nudft_type2(const FieldSpectrum& spectrum, const std::vector<Vec3>& points) {
  return nudft_type2(spectrum, std::span<const Vec3>(points));
}

/// Type-2 check against an explicit domain.
inline std::vector<cplx> nudft_type2(const FieldSpectrum& spectrum, std::span<const Vec3> points, const Domain& domain) {
  if (domain.length != spectrum.modes.length()) throw ArgumentError("nudft_type2: spectrum and points live on different domains");
  return nudft_type2(spectrum, points);
}

/// Three simultaneous type-2 transforms whose outputs are real-valued fields.
/// Returns the real parts; `max_imag` receives max_j |Im u_j| over all
/// components, for the caller's realness check.
inline std::vector<Vec3> nudft_type2_real3(const std::array<const FieldSpectrum*, 3>& spectra,
                                           std::span<const Vec3> points, double* max_imag = nullptr) {
  const ModeSet& modes = spectra[0]->modes;
  for (const auto* s : spectra) {
    if (!(s->modes == modes)) throw ArgumentError("nudft_type2_real3: spectra on different mode sets");
  }
  detail::check_points(points, modes.length());
  const int n = modes.per_dim();
  const std::size_t nm = modes.size();
  std::vector<double> c_re(3 * nm), c_im(3 * nm);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t f = 0; f < nm; ++f) {
      c_re[d * nm + f] = spectra[d]->coeffs[f].real();
      c_im[d * nm + f] = spectra[d]->coeffs[f].imag();
    }
  }
  detail::AxisTables tab(n);
  const double* ex_r = tab.re.data();
  const double* ex_i = tab.im.data();
  const double* ey_r = ex_r + n;
  const double* ey_i = ex_i + n;
  const double* ez_r = ex_r + 2 * n;
  const double* ez_i = ex_i + 2 * n;

  std::vector<Vec3> out(points.size());
  double imag_peak = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    tab.fill(points[j], modes.k_unit(), n, +1);
    std::array<double, 3> ur{}, ui{};
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        const double ar = ex_r[ix] * ey_r[iy] - ex_i[ix] * ey_i[iy];
        const double ai = ex_r[ix] * ey_i[iy] + ex_i[ix] * ey_r[iy];
        const std::size_t row = (static_cast<std::size_t>(ix) * n + iy) * n;
        for (std::size_t d = 0; d < 3; ++d) {
          const double* cr = c_re.data() + d * nm + row;
          const double* ci = c_im.data() + d * nm + row;
          double tr = 0.0, ti = 0.0;
          for (int iz = 0; iz < n; ++iz) {
            tr += cr[iz] * ez_r[iz] - ci[iz] * ez_i[iz];
            ti += cr[iz] * ez_i[iz] + ci[iz] * ez_r[iz];
          }
          ur[d] += ar * tr - ai * ti;
          ui[d] += ar * ti + ai * tr;
        }
      }
    }
    out[j] = {ur[0], ur[1], ur[2]};
    imag_peak = std::max({imag_peak, std::abs(ui[0]), std::abs(ui[1]), std::abs(ui[2])});
  }
  if (max_imag) *max_imag = imag_peak;
  return out;
}

}  // namespace parapif
