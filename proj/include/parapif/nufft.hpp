// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tolerance-controlled nonuniform FFT (types 1 and 2) in 3D.
//
// Gridding scheme: spread onto an oversampled M^3 grid (M >= 2N) with the
// "exponential of semicircle" kernel phi(z) = exp(beta (sqrt(1 - z^2) - 1)),
// |z| <= 1, of width W grid points, shifted down by exp(-beta) so that it
// vanishes at the support edge and the transform is continuous in the
// point positions; uniform FFT; divide by the kernel's
// Fourier transform on the retained modes. Type 2 runs the same three
// factors transposed, so the pair is an exact algebraic adjoint for any W.
//
//   W = ceil(log10(1/eps)) + 2,  beta = 2.30 W
//
// The kernel transform is tabulated once per plan by Gauss-Legendre
// quadrature; plans are immutable and may be shared across threads.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/fft.hpp"
#include "parapif/nudft.hpp"
#include "parapif/spectrum.hpp"

namespace parapif {

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

template <class F>
decltype(auto) dispatch_width(int w, F&& f) {
  switch (w) {
    case 4: return f(std::integral_constant<int, 4>{});
    case 5: return f(std::integral_constant<int, 5>{});
    case 6: return f(std::integral_constant<int, 6>{});
    case 7: return f(std::integral_constant<int, 7>{});
    case 8: return f(std::integral_constant<int, 8>{});
    case 9: return f(std::integral_constant<int, 9>{});
    case 10: return f(std::integral_constant<int, 10>{});
    case 11: return f(std::integral_constant<int, 11>{});
    case 12: return f(std::integral_constant<int, 12>{});
    case 13: return f(std::integral_constant<int, 13>{});
    case 14: return f(std::integral_constant<int, 14>{});
    case 15: return f(std::integral_constant<int, 15>{});
    case 16: return f(std::integral_constant<int, 16>{});
    case 17: return f(std::integral_constant<int, 17>{});
    default: throw ArgumentError("unsupported NUFFT kernel width");
  }
}

}  // namespace detail

/// Precomputed NUFFT data for one mode set and tolerance.
class NufftPlan {
 public:
  NufftPlan(const ModeSet& modes, double tolerance) : modes_(modes), tolerance_(tolerance), fft_(1) {
    if (!(tolerance > 1e-15 && tolerance < 1e-1)) throw ArgumentError("NUFFT tolerance must lie in (1e-15, 1e-1)");
    width_ = static_cast<int>(std::ceil(-std::log10(tolerance))) + 2;
    width_ = std::clamp(width_, 4, 17);
    beta_ = (width_ == 4 ? 2.26 : 2.30) * width_;
    edge_ = std::exp(-beta_);
    grid_ = static_cast<int>(
        detail::next_power_of_two(std::max<std::size_t>(2 * static_cast<std::size_t>(modes.per_dim()), 2 * static_cast<std::size_t>(width_))));
    fft_ = fft::Radix2(static_cast<std::size_t>(grid_));
    build_correction();
  }

  const ModeSet& modes() const { return modes_; }
  double tolerance() const { return tolerance_; }
  int kernel_width() const { return width_; }
  int oversampled_size() const { return grid_; }
  double kernel_beta() const { return beta_; }

  double kernel(double z) const {
    const double s = 1.0 - z * z;
    return s > 0.0 ? std::exp(beta_ * (std::sqrt(s) - 1.0)) - edge_ : 0.0;
  }

  /// Approximates nudft_type1.
  template <class T>
  FieldSpectrum type1(std::span<const Vec3> points, std::span<const T> strengths) const {
    static_assert(std::is_same_v<T, double> || std::is_same_v<T, cplx>);
    if (points.size() != strengths.size()) throw ArgumentError("nufft_type1: points and strengths differ in length");
    detail::check_points(points, modes_.length());
    const std::size_t m = static_cast<std::size_t>(grid_);
    std::vector<cplx> work(m * m * m);
    detail::dispatch_width(width_, [&](auto wc) {
      constexpr int W = decltype(wc)::value;
      std::vector<T> padded(m * m * (m + W), T{});
      spread<W, T>(points, strengths, padded);
      for (std::size_t r = 0; r < m * m; ++r) {
        T* row = padded.data() + r * (m + W);
        for (int c = 0; c < W; ++c) row[c] += row[m + c];
        for (std::size_t z = 0; z < m; ++z) work[r * m + z] = cplx(row[z]);
      }
    });
    fft::transform_3d(work, fft_, -1);
    FieldSpectrum out(modes_);
    const double scale = 1.0 / (modes_.length() * modes_.length() * modes_.length());
    const int n = modes_.per_dim();
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        for (int iz = 0; iz < n; ++iz) {
          const double c = correction_[ix] * correction_[iy] * correction_[iz] * scale;
          out.coeffs[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = c * work[grid_index(ix, iy, iz)];
        }
      }
    }
    return out;
  }

  template <class T>
  FieldSpectrum type1(const std::vector<Vec3>& points, const std::vector<T>& strengths) const {
    return type1<T>(std::span<const Vec3>(points), std::span<const T>(strengths));
  }

  /// Approximates nudft_type2.
  std::vector<cplx> type2(const FieldSpectrum& spectrum, std::span<const Vec3> points) const {
    if (!(spectrum.modes == modes_)) throw ArgumentError("nufft_type2: spectrum does not match the plan's mode set");
    detail::check_points(points, modes_.length());
    std::vector<cplx> work = upsample(spectrum);
    fft::transform_3d(work, fft_, +1);
    std::vector<cplx> out(points.size());
    detail::dispatch_width(width_, [&](auto wc) {
      constexpr int W = decltype(wc)::value;
      const std::vector<cplx> padded = pad_rows<W>(work);
      interpolate<W, cplx, 1>(points, {padded.data()}, [&](std::size_t j, const std::array<cplx, 1>& u) { out[j] = u[0]; });
    });
    return out;
  }

  std::vector<cplx> type2(const FieldSpectrum& spectrum, const std::vector<Vec3>& points) const {
    return type2(spectrum, std::span<const Vec3>(points));
  }

  /// Three type-2 transforms of Hermitian spectra. The oversampled grids are
  /// interpolated as real fields; `max_imag` / `max_real` receive the peak
  /// imaginary and real grid values for the caller's realness check.
  std::vector<Vec3> type2_real3(const std::array<const FieldSpectrum*, 3>& spectra, std::span<const Vec3> points,
                                double* max_imag = nullptr, double* max_real = nullptr) const {
    for (const auto* s : spectra) {
      if (!(s->modes == modes_)) throw ArgumentError("nufft_type2: spectrum does not match the plan's mode set");
    }
    detail::check_points(points, modes_.length());
    const std::size_t m = static_cast<std::size_t>(grid_);
    std::array<std::vector<double>, 3> real_grids;
    double peak_re = 0.0, peak_im = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<cplx> work = upsample(*spectra[d]);
      fft::transform_3d(work, fft_, +1);
      real_grids[d].resize(m * m * m);
      for (std::size_t i = 0; i < work.size(); ++i) {
        real_grids[d][i] = work[i].real();
        peak_re = std::max(peak_re, std::abs(work[i].real()));
        peak_im = std::max(peak_im, std::abs(work[i].imag()));
      }
    }
    if (max_imag) *max_imag = peak_im;
    if (max_real) *max_real = peak_re;
    std::vector<Vec3> out(points.size());
    detail::dispatch_width(width_, [&](auto wc) {
      constexpr int W = decltype(wc)::value;
      const auto gx = pad_rows<W>(real_grids[0]);
      const auto gy = pad_rows<W>(real_grids[1]);
      const auto gz = pad_rows<W>(real_grids[2]);
      interpolate<W, double, 3>(points, {gx.data(), gy.data(), gz.data()},
                                [&](std::size_t j, const std::array<double, 3>& u) { out[j] = {u[0], u[1], u[2]}; });
    });
    return out;
  }

 private:
  std::size_t grid_index(int ix, int iy, int iz) const {
    const int n = modes_.per_dim();
    const auto m = static_cast<std::size_t>(grid_);
    auto wrap = [&](int i) { return static_cast<std::size_t>((i - n / 2 + grid_) % grid_); };
    return (wrap(ix) * m + wrap(iy)) * m + wrap(iz);
  }

  void build_correction() {
    // corr[n] = Delta / psi_hat(n), psi_hat(n) = (W Delta / 2) int_{-1}^{1} phi(z) cos(n W Delta z / 2) dz.
    std::vector<double> nodes, weights;
    detail::gauss_legendre(2 * width_ + 60, nodes, weights);
    const double delta = 2.0 * std::numbers::pi / grid_;
    const int n = modes_.per_dim();
    correction_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double freq = static_cast<double>(i - n / 2) * width_ * delta / 2.0;
      double integral = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) integral += weights[q] * kernel(nodes[q]) * std::cos(freq * nodes[q]);
      correction_[static_cast<std::size_t>(i)] = 2.0 / (width_ * integral);
    }
  }

  /// Modes scaled by the correction and placed on the oversampled grid.
  std::vector<cplx> upsample(const FieldSpectrum& spectrum) const {
    const std::size_t m = static_cast<std::size_t>(grid_);
    std::vector<cplx> work(m * m * m);
    const int n = modes_.per_dim();
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        for (int iz = 0; iz < n; ++iz) {
          const double c = correction_[ix] * correction_[iy] * correction_[iz];
          work[grid_index(ix, iy, iz)] = c * spectrum.coeffs[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
        }
      }
    }
    return work;
  }

  template <int W>
  struct Footprint {
    std::array<double, W> kx, ky, kz;
    std::array<std::size_t, W> ix, iy;
    std::size_t z0;
  };

  template <int W>
  void footprint(const Vec3& p, Footprint<W>& fp) const {
    const double scale = grid_ / modes_.length();
    const double half = 0.5 * W;
    const int m = grid_;
    auto axis = [&](double x, std::array<double, W>& k) {
      const double t = x * scale;
      const double start = std::ceil(t - half);
      for (int i = 0; i < W; ++i) k[i] = kernel((start + i - t) / half);
      return ((static_cast<long>(start) % m) + m) % m;
    };
    const long bx = axis(p.x, fp.kx);
    const long by = axis(p.y, fp.ky);
    fp.z0 = static_cast<std::size_t>(axis(p.z, fp.kz));
    for (int i = 0; i < W; ++i) {
      fp.ix[i] = static_cast<std::size_t>((bx + i) % m);
      fp.iy[i] = static_cast<std::size_t>((by + i) % m);
    }
  }

  /// Spreads onto an M x M x (M + W) grid; the last W z-cells alias z = 0..W-1.
  template <int W, class T>
  void spread(std::span<const Vec3> points, std::span<const T> strengths, std::vector<T>& padded) const {
    const std::size_t m = static_cast<std::size_t>(grid_);
    const std::size_t row_len = m + W;
    Footprint<W> fp;
    for (std::size_t j = 0; j < points.size(); ++j) {
      footprint<W>(points[j], fp);
      const T s = strengths[j];
      for (int a = 0; a < W; ++a) {
        const T sa = s * fp.kx[a];
        for (int b = 0; b < W; ++b) {
          const T sab = sa * fp.ky[b];
          T* row = padded.data() + (fp.ix[a] * m + fp.iy[b]) * row_len + fp.z0;
          for (int c = 0; c < W; ++c) row[c] += sab * fp.kz[c];
        }
      }
    }
  }

  /// Copies an M^3 grid into rows of length M + W with wrapped z padding.
  template <int W, class T>
  std::vector<T> pad_rows(const std::vector<T>& grid) const {
    const std::size_t m = static_cast<std::size_t>(grid_);
    std::vector<T> padded(m * m * (m + W));
    for (std::size_t r = 0; r < m * m; ++r) {
      T* dst = padded.data() + r * (m + W);
      const T* src = grid.data() + r * m;
      std::copy(src, src + m, dst);
      for (int c = 0; c < W; ++c) dst[m + c] = src[static_cast<std::size_t>(c) % m];
    }
    return padded;
  }

  template <int W, class T, std::size_t C, class Sink>
  void interpolate(std::span<const Vec3> points, const std::array<const T*, C>& grids, Sink&& sink) const {
    const std::size_t m = static_cast<std::size_t>(grid_);
    const std::size_t row_len = m + W;
    Footprint<W> fp;
    for (std::size_t j = 0; j < points.size(); ++j) {
      footprint<W>(points[j], fp);
      std::array<T, C> u{};
      for (int a = 0; a < W; ++a) {
        std::array<T, C> ua{};
        for (int b = 0; b < W; ++b) {
          const std::size_t off = (fp.ix[a] * m + fp.iy[b]) * row_len + fp.z0;
          for (std::size_t d = 0; d < C; ++d) {
            const T* row = grids[d] + off;
            T acc{};
            for (int c = 0; c < W; ++c) acc += row[c] * fp.kz[c];
            ua[d] += acc * fp.ky[b];
          }
        }
        for (std::size_t d = 0; d < C; ++d) u[d] += ua[d] * fp.kx[a];
      }
      sink(j, u);
    }
  }

  ModeSet modes_;
  double tolerance_;
  int width_ = 0;
  double beta_ = 0.0;
  double edge_ = 0.0;
  int grid_ = 0;
  fft::Radix2 fft_;
  std::vector<double> correction_;
};

template <class T>
FieldSpectrum nufft_type1(std::span<const Vec3> points, std::span<const T> strengths, const NufftPlan& plan) {
  return plan.type1<T>(points, strengths);
}

inline std::vector<cplx> nufft_type2(const FieldSpectrum& spectrum, std::span<const Vec3> points, const NufftPlan& plan) {
  return plan.type2(spectrum, points);
}

}  // namespace parapif
