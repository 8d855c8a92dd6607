// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Iterative radix-2 FFT (power-of-two sizes) and its 3D extension over
// row-major n^3 arrays.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "parapif/core.hpp"

namespace parapif::fft {

using cplx = std::complex<double>;

/// Precomputed twiddles and bit-reversal table for one transform length.
class Radix2 {
 public:
  explicit Radix2(std::size_t n) : n_(n) {
    if (!is_power_of_two(n)) throw ArgumentError("FFT length must be a power of two");
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = static_cast<std::uint32_t>(r);
    }
    // Each twiddle is evaluated directly, not by recurrence.
    twiddle_.resize(n / 2 > 0 ? n / 2 : 1);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(a), std::sin(a)};
    }
  }

  std::size_t size() const { return n_; }

  /// In-place unnormalized transform: out_k = sum_l in_l exp(sign * 2 pi i k l / n).
  void transform(cplx* data, int sign) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = bitrev_[i];
      if (i < r) std::swap(data[i], data[r]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const cplx tw = twiddle_[k * step];
          const double wr = tw.real();
          const double wi = sign < 0 ? tw.imag() : -tw.imag();
          cplx& a = data[start + k];
          cplx& b = data[start + k + half];
          const double br = b.real() * wr - b.imag() * wi;
          const double bi = b.real() * wi + b.imag() * wr;
          b = {a.real() - br, a.imag() - bi};
          a = {a.real() + br, a.imag() + bi};
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<cplx> twiddle_;
};

/// Unnormalized in-place 3D transform of a row-major n^3 array.
inline void transform_3d(std::span<cplx> data, const Radix2& plan, int sign) {
  const std::size_t n = plan.size();
  if (data.size() != n * n * n) throw ArgumentError("3D FFT buffer size mismatch");
  std::vector<cplx> line(n);
  // Contiguous last axis.
  for (std::size_t r = 0; r < n * n; ++r) plan.transform(data.data() + r * n, sign);
  // Middle axis.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      cplx* base = data.data() + i * n * n + k;
      for (std::size_t j = 0; j < n; ++j) line[j] = base[j * n];
      plan.transform(line.data(), sign);
      for (std::size_t j = 0; j < n; ++j) base[j * n] = line[j];
    }
  }
  // Leading axis.
  for (std::size_t jk = 0; jk < n * n; ++jk) {
    cplx* base = data.data() + jk;
    for (std::size_t i = 0; i < n; ++i) line[i] = base[i * n * n];
    plan.transform(line.data(), sign);
    for (std::size_t i = 0; i < n; ++i) base[i * n * n] = line[i];
  }
}

inline void transform_3d(std::span<cplx> data, std::size_t n, int sign) { transform_3d(data, Radix2(n), sign); }

}  // namespace parapif::fft
