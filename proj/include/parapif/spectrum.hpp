// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated Fourier mode sets, spectra over them, and uniform real-space
// grid fields, with the unitary grid <-> spectrum FFT pair.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/fft.hpp"

namespace parapif {

using cplx = std::complex<double>;

/// Integer mode triples n in [-N/2, N/2-1]^3, enumerated row-major over
/// (n_x, n_y, n_z) with n_z fastest. Physical wavenumber k = (2 pi / L) n.
class ModeSet {
 public:
  ModeSet(int n, double length) : n_(n), length_(length) {
    if (n < 2 || n % 2 != 0) throw ArgumentError("mode count per dimension must be even and >= 2");
    if (!(length > 0.0)) throw ArgumentError("domain length must be positive");
  }

  int per_dim() const { return n_; }
  double length() const { return length_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double k_unit() const { return 2.0 * std::numbers::pi / length_; }

  /// Signed index in [-N/2, N/2) for position i in [0, N).
  int signed_index(int i) const { return i - n_ / 2; }

  std::size_t flat(int nx, int ny, int nz) const {
    const int h = n_ / 2;
    return (static_cast<std::size_t>(nx + h) * n_ + static_cast<std::size_t>(ny + h)) * n_ +
           static_cast<std::size_t>(nz + h);
  }

  std::array<int, 3> triple(std::size_t flat_index) const {
    const auto n = static_cast<std::size_t>(n_);
    const int iz = static_cast<int>(flat_index % n);
    const int iy = static_cast<int>((flat_index / n) % n);
    const int ix = static_cast<int>(flat_index / (n * n));
    return {signed_index(ix), signed_index(iy), signed_index(iz)};
  }

  Vec3 wavenumber(std::size_t flat_index) const {
    const auto t = triple(flat_index);
    const double u = k_unit();
    return {u * t[0], u * t[1], u * t[2]};
  }

  /// True when any component sits on the unpaired -N/2 plane.
  bool is_nyquist(std::size_t flat_index) const {
    const auto t = triple(flat_index);
    return t[0] == -n_ / 2 || t[1] == -n_ / 2 || t[2] == -n_ / 2;
  }

  std::size_t zero_index() const { return flat(0, 0, 0); }

  bool operator==(const ModeSet& o) const { return n_ == o.n_ && length_ == o.length_; }

 private:
  int n_;
  double length_;
};

enum class SpectrumKind { Density, FieldX, FieldY, FieldZ };

/// How coefficients relate to real space.
///   FourierSeries: f(x) = sum_k c_k exp(i k x)   (PIF, 1/L^3 forward scale)
///   UnitaryGrid:   unitary DFT of node values   (PIC, 1/sqrt(N^3) both ways)
enum class SpectrumNormalization { FourierSeries, UnitaryGrid };

struct FieldSpectrum {
  ModeSet modes;
  std::vector<cplx> coeffs;
  SpectrumKind kind = SpectrumKind::Density;
  SpectrumNormalization normalization = SpectrumNormalization::FourierSeries;

  explicit FieldSpectrum(const ModeSet& m, SpectrumKind k = SpectrumKind::Density,
                         SpectrumNormalization norm = SpectrumNormalization::FourierSeries)
      : modes(m), coeffs(m.size()), kind(k), normalization(norm) {}

  cplx& at(int nx, int ny, int nz) { return coeffs[modes.flat(nx, ny, nz)]; }
  cplx at(int nx, int ny, int nz) const { return coeffs[modes.flat(nx, ny, nz)]; }
};

/// Writes "n_x,n_y,n_z,re,im" rows in enumeration order.
inline void write_spectrum_csv(const FieldSpectrum& s, std::ostream& out) {
  out << "n_x,n_y,n_z,re,im\n";
  const auto prec = out.precision(17);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const auto t = s.modes.triple(i);
    out << t[0] << ',' << t[1] << ',' << t[2] << ',' << s.coeffs[i].real() << ',' << s.coeffs[i].imag() << '\n';
  }
  out.precision(prec);
}

/// Real scalar field on N^3 periodic nodes, node (i,j,k) at h*(i,j,k).
struct GridField {
  int n = 0;
  double length = 1.0;
  std::vector<double> values;

  GridField(int nodes, double side) : n(nodes), length(side), values(static_cast<std::size_t>(nodes) * nodes * nodes) {
    if (nodes < 1) throw ArgumentError("grid must have at least one node per dimension");
  }

  double h() const { return length / n; }
  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n + static_cast<std::size_t>(k);
  }
  double& at(int i, int j, int k) { return values[flat(i, j, k)]; }
  double at(int i, int j, int k) const { return values[flat(i, j, k)]; }
};

/// Writes "i,j,k,value" rows.
inline void write_grid_csv(const GridField& g, std::ostream& out) {
  out << "i,j,k,value\n";
  const auto prec = out.precision(17);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k) out << i << ',' << j << ',' << k << ',' << g.at(i, j, k) << '\n';
  out.precision(prec);
}

namespace detail {

/// Grid position in [0, N) holding signed mode index s.
inline std::size_t wrap_mode(int s, int n) { return static_cast<std::size_t>(s < 0 ? s + n : s); }

}  // namespace detail

/// Unitary forward DFT: c_n = N^{-3/2} sum_p g_p exp(-2 pi i n.p / N), stored
/// over the symmetric mode set.
inline FieldSpectrum fft_forward(const GridField& grid) {
  const int n = grid.n;
  if (!is_power_of_two(static_cast<std::size_t>(n))) throw ArgumentError("FFT grid size must be a power of two");
  ModeSet modes(n, grid.length);
  std::vector<cplx> work(grid.values.begin(), grid.values.end());
  fft::transform_3d(work, static_cast<std::size_t>(n), -1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n) * n * n);
  FieldSpectrum out(modes, SpectrumKind::Density, SpectrumNormalization::UnitaryGrid);
  for (std::size_t f = 0; f < modes.size(); ++f) {
    const auto t = modes.triple(f);
    const std::size_t g = (detail::wrap_mode(t[0], n) * n + detail::wrap_mode(t[1], n)) * n + detail::wrap_mode(t[2], n);
    out.coeffs[f] = work[g] * scale;
  }
  return out;
}

/// Complex inverse of fft_forward (no real-part projection).
inline std::vector<cplx> fft_inverse_complex(const FieldSpectrum& spectrum) {
  const int n = spectrum.modes.per_dim();
  if (!is_power_of_two(static_cast<std::size_t>(n))) throw ArgumentError("FFT grid size must be a power of two");
  std::vector<cplx> work(spectrum.modes.size());
  for (std::size_t f = 0; f < spectrum.modes.size(); ++f) {
    const auto t = spectrum.modes.triple(f);
    const std::size_t g = (detail::wrap_mode(t[0], n) * n + detail::wrap_mode(t[1], n)) * n + detail::wrap_mode(t[2], n);
    work[g] = spectrum.coeffs[f];
  }
  fft::transform_3d(work, static_cast<std::size_t>(n), +1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n) * n * n);
  for (auto& c : work) c *= scale;
  return work;
}

/// Unitary inverse DFT returning the real part on the grid.
inline GridField fft_inverse(const FieldSpectrum& spectrum) {
  const auto work = fft_inverse_complex(spectrum);
  GridField out(spectrum.modes.per_dim(), spectrum.modes.length());
  for (std::size_t i = 0; i < work.size(); ++i) out.values[i] = work[i].real();
  return out;
}

}  // namespace parapif
