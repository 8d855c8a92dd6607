// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Centered cardinal B-spline shape functions of order m (degree m, support
// m+1 cells): grid deposition/gather weights and the Fourier multiplier
//
//   S_k = prod_d sinc(k_d h / 2)^(m+1),   sinc(x) = sin(x) / x.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/spectrum.hpp"

namespace parapif {

/// Shape of order `order` on a mesh of spacing `h`.
struct BSpline {
  int order = 1;
  double h = 1.0;

  BSpline(int m, double spacing) : order(m), h(spacing) {
    if (m < 1 || m > 15) throw ArgumentError("B-spline order must lie in [1, 15]");
    if (!(spacing > 0.0)) throw ArgumentError("mesh spacing must be positive");
  }

  int support() const { return order + 1; }

  /// Centered B-spline value at offset t (in cells) from a node.
  double value(double t) const {
    const int m = order;
    const double y = t + 0.5 * (m + 1);
    if (y <= 0.0 || y >= m + 1) return 0.0;
    const double j = std::floor(y);
    std::array<double, 32> b{};
    axis_weights(y - j, b.data());
    // Node offset r corresponds to knot j - m + r; the spline started at knot 0.
    const int r = m - static_cast<int>(j);
    return (r >= 0 && r <= m) ? b[static_cast<std::size_t>(r)] : 0.0;
  }

  /// Fills out[0..m] with the weights of the m+1 nodes touched along one axis
  /// for a point whose shifted knot fraction is f in [0, 1).
  void axis_weights(double f, double* out) const {
    const int m = order;
    out[0] = 1.0;
    for (int d = 1; d <= m; ++d) {
      double prev = 0.0;  // b^{d-1}_{r-1}
      for (int r = 0; r <= d; ++r) {
        const double cur = r < d ? out[r] : 0.0;
        out[r] = ((f + d - r) * prev + (r + 1 - f) * cur) / d;
        prev = cur;
      }
    }
  }

  /// First node index (unwrapped) and weights along one axis for coordinate x.
  long axis_stencil(double x, double* weights) const {
    const double y = x / h + 0.5 * (order + 1);
    const double j = std::floor(y);
    axis_weights(y - j, weights);
    return static_cast<long>(j) - order;
  }
};

struct NodeWeight {
  std::array<int, 3> node;
  double weight;
};

/// Deposition weights of a particle at x onto an n^3 periodic grid with
/// spacing h: (m+1)^3 entries, nonnegative, summing to 1.
inline std::vector<NodeWeight> deposit_weights(const Vec3& x, int m, double h, int n) {
  BSpline s(m, h);
  const int p = s.support();
  std::array<std::vector<double>, 3> w;
  std::array<long, 3> first{};
  for (std::size_t d = 0; d < 3; ++d) {
    w[d].resize(static_cast<std::size_t>(p));
    first[d] = s.axis_stencil(x[d], w[d].data());
  }
  auto wrap = [n](long i) { return static_cast<int>(((i % n) + n) % n); };
  std::vector<NodeWeight> out;
  out.reserve(static_cast<std::size_t>(p) * p * p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        out.push_back({{wrap(first[0] + a), wrap(first[1] + b), wrap(first[2] + c)}, w[0][a] * w[1][b] * w[2][c]});
  return out;
}

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

/// S_k over a mode set, for shape width h_eff.
inline std::vector<double> fourier_multiplier(int m, const ModeSet& modes, double h_eff) {
  if (m < 1) throw ArgumentError("B-spline order must be >= 1");
  const int n = modes.per_dim();
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double k = modes.k_unit() * modes.signed_index(i);
    axis[static_cast<std::size_t>(i)] = std::pow(sinc(0.5 * k * h_eff), m + 1);
  }
  std::vector<double> out(modes.size());
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        out[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = axis[ix] * axis[iy] * axis[iz];
  return out;
}

}  // namespace parapif
