// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Particle-in-cell field solve: B-spline deposit onto an N^3 grid, uniform
// background subtraction, spectral Poisson solve with the unitary FFT, and
// gather with the same B-spline weights.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/fft.hpp"
#include "parapif/pif.hpp"
#include "parapif/shape.hpp"
#include "parapif/spectrum.hpp"

namespace parapif {

class PicFieldSolver {
 public:
  PicFieldSolver(const PropagatorConfig& cfg, double length)
      : cfg_((cfg.validate(), cfg)), modes_(cfg.modes, length), poisson_(modes_), spline_(cfg.spline_order, length / cfg.modes) {
    if (cfg.scheme != Scheme::Pic) throw ConfigurationError("PIC solver needs the pic scheme");
  }

  const ModeSet& modes() const { return modes_; }
  const PoissonOperator& poisson() const { return poisson_; }
  double h() const { return spline_.h; }

  /// Charge density on the nodes, before background subtraction.
  GridField deposit(const PhaseSpaceState& s) const {
    const int n = modes_.per_dim();
    GridField rho(n, modes_.length());
    const double scale = s.charge / (spline_.h * spline_.h * spline_.h);
    const auto& w = s.weights();
    Stencil st(spline_.support());
    for (std::size_t j = 0; j < s.size(); ++j) {
      stencil(s.x[j], st);
      const double q = scale * w[j];
      for (int a = 0; a < st.p; ++a) {
        for (int b = 0; b < st.p; ++b) {
          const double qab = q * st.w[0][a] * st.w[1][b];
          double* row = rho.values.data() + (static_cast<std::size_t>(st.i[0][a]) * n + st.i[1][b]) * n;
          for (int c = 0; c < st.p; ++c) row[st.i[2][c]] += qab * st.w[2][c];
        }
      }
    }
    return rho;
  }

  /// Interpolates a nodal vector field to the particles.
  std::vector<Vec3> gather(const std::array<const GridField*, 3>& e, const std::vector<Vec3>& x) const {
    const int n = modes_.per_dim();
    std::vector<Vec3> out(x.size());
    Stencil st(spline_.support());
    for (std::size_t j = 0; j < x.size(); ++j) {
      stencil(x[j], st);
      Vec3 acc;
      for (int a = 0; a < st.p; ++a) {
        for (int b = 0; b < st.p; ++b) {
          const std::size_t row = (static_cast<std::size_t>(st.i[0][a]) * n + st.i[1][b]) * n;
          Vec3 r;
          for (int c = 0; c < st.p; ++c) {
            const std::size_t idx = row + st.i[2][c];
            const double wc = st.w[2][c];
            r.x += wc * e[0]->values[idx];
            r.y += wc * e[1]->values[idx];
            r.z += wc * e[2]->values[idx];
          }
          acc += (st.w[0][a] * st.w[1][b]) * r;
        }
      }
      out[j] = acc;
    }
    return out;
  }

  FieldSolution solve(const PhaseSpaceState& s) const {
    s.validate();
    require_finite(s);
    const int n = modes_.per_dim();
    const double h3 = spline_.h * spline_.h * spline_.h;
    GridField rho = deposit(s);
    double charge = 0.0;
    for (double r : rho.values) charge += r;
    charge *= h3;

    FieldSolution out(modes_);
    out.measured_charge = charge;
    const double mean = charge / (h3 * static_cast<double>(rho.values.size()));
    for (double& r : rho.values) r -= mean;
    out.density = fft_forward(rho);

    std::array<FieldSpectrum, 3> es{FieldSpectrum(modes_, SpectrumKind::FieldX, SpectrumNormalization::UnitaryGrid),
                                    FieldSpectrum(modes_, SpectrumKind::FieldY, SpectrumNormalization::UnitaryGrid),
                                    FieldSpectrum(modes_, SpectrumKind::FieldZ, SpectrumNormalization::UnitaryGrid)};
    double energy = 0.0, energy_z = 0.0;
    for (std::size_t f = 0; f < modes_.size(); ++f) {
      const cplx r = out.density.coeffs[f];
      const Vec3& g = poisson_.gradient(f);
      const cplx e(r.imag(), -r.real());  // -i rho
      for (std::size_t d = 0; d < 3; ++d) es[d].coeffs[f] = g[d] * e;
      energy += dot(g, g) * std::norm(r);
      energy_z += g.z * g.z * std::norm(r);
    }
    out.field_energy = 0.5 * h3 * energy;
    out.field_energy_z = 0.5 * h3 * energy_z;
    // Restore the k = 0 mode so `density` reflects the deposited charge.
    out.density.coeffs[modes_.zero_index()] = mean * std::sqrt(static_cast<double>(n) * n * n);

    std::array<GridField, 3> eg{GridField(n, modes_.length()), GridField(n, modes_.length()), GridField(n, modes_.length())};
    double max_imag = 0.0, max_real = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const auto c = fft_inverse_complex(es[d]);
      for (std::size_t i = 0; i < c.size(); ++i) {
        eg[d].values[i] = c[i].real();
        max_real = std::max(max_real, std::abs(c[i].real()));
        max_imag = std::max(max_imag, std::abs(c[i].imag()));
      }
    }
    detail::check_realness(max_imag, max_real, detail::field_scale(s, modes_.length()));
    out.field = gather({&eg[0], &eg[1], &eg[2]}, s.x);
    return out;
  }

 private:
  struct Stencil {
    int p;
    std::array<std::array<int, 16>, 3> i{};
    std::array<std::array<double, 16>, 3> w{};
    explicit Stencil(int support) : p(support) {}
  };

  void stencil(const Vec3& x, Stencil& st) const {
    const int n = modes_.per_dim();
    for (std::size_t d = 0; d < 3; ++d) {
      const long first = spline_.axis_stencil(x[d], st.w[d].data());
      for (int a = 0; a < st.p; ++a) st.i[d][a] = static_cast<int>((((first + a) % n) + n) % n);
    }
  }

  PropagatorConfig cfg_;
  ModeSet modes_;
  PoissonOperator poisson_;
  BSpline spline_;
};

/// Self-consistent PIC field at each particle.
inline std::vector<Vec3> pic_field_at_particles(const PhaseSpaceState& s, const PropagatorConfig& cfg, double length) {
  return PicFieldSolver(cfg, length).solve(s).field;
}

}  // namespace parapif
