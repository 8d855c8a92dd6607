// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Particle-in-Fourier field solve:
//
//   rho_k  = (q S_k / L^3) sum_j w_j exp(-i k.x_j)
//   E_k    = -i k / |k|^2 rho_k              (k = 0 and Nyquist planes -> 0)
//   E(x_j) = sum_k E_k S_k exp(i k.x_j)
//
// The scatter/gather pair is either the exact NUDFT or a NUFFT at a given
// tolerance.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/nudft.hpp"
#include "parapif/nufft.hpp"
#include "parapif/shape.hpp"
#include "parapif/spectrum.hpp"

namespace parapif {

/// Diagonal operator E_k = L_k rho_k with L_k = -i k / |k|^2.
///
/// L_0 = 0 (neutralizing background). Modes with any component on the
/// unpaired -N/2 plane are also mapped to zero: their partner +N/2 is not in
/// the set, so keeping them would make the gathered field complex.
class PoissonOperator {
 public:
  explicit PoissonOperator(const ModeSet& modes) : modes_(modes), g_(modes.size()) {
    for (std::size_t f = 0; f < modes.size(); ++f) {
      if (f == modes.zero_index() || modes.is_nyquist(f)) continue;
      const Vec3 k = modes.wavenumber(f);
      g_[f] = (1.0 / dot(k, k)) * k;
    }
  }

  const ModeSet& modes() const { return modes_; }

  /// Real vector g_k with L_k = -i g_k.
  const Vec3& gradient(std::size_t f) const { return g_[f]; }

  std::array<cplx, 3> entry(std::size_t f) const {
    const Vec3& g = g_[f];
    return {cplx(0.0, -g.x), cplx(0.0, -g.y), cplx(0.0, -g.z)};
  }

 private:
  ModeSet modes_;
  std::vector<Vec3> g_;
};

/// Result of one field solve.
struct FieldSolution {
  std::vector<Vec3> field;        // self-consistent E at each particle
  FieldSpectrum density;          // charge density spectrum before background removal
  double field_energy = 0.0;      // (1/2) int |E|^2
  double field_energy_z = 0.0;    // z-component only
  double measured_charge = 0.0;   // total charge seen by the k = 0 mode

  explicit FieldSolution(const ModeSet& m) : density(m) {}
};

namespace detail {

/// Largest field magnitude worth resolving for a state: |Q| / L^2.
inline double field_scale(const PhaseSpaceState& s, double length) {
  return std::abs(total_charge(s)) / (length * length);
}

inline void check_realness(double max_imag, double max_real, double scale) {
  if (!(max_imag <= 1e-10 * std::max(max_real, scale))) {
    throw NumericError("gathered field has a non-negligible imaginary part");
  }
}

}  // namespace detail

class PifFieldSolver {
 public:
  PifFieldSolver(const PropagatorConfig& cfg, double length)
      : cfg_((cfg.validate(), cfg)), modes_(cfg.modes, length), shape_(), poisson_(modes_) {
    if (cfg.scheme == Scheme::Pic) throw ConfigurationError("PIF solver needs a pif_nudft or pif_nufft scheme");
    shape_ = fourier_multiplier(cfg.spline_order, modes_, length / cfg.modes);
    if (cfg.scheme == Scheme::PifNufft) {
      try {
        plan_.emplace(modes_, cfg.nufft_tolerance);
      } catch (const ArgumentError& e) {
        throw ConfigurationError(std::string("NUFFT plan: ") + e.what());
      }
    }
  }

  const ModeSet& modes() const { return modes_; }
  const std::vector<double>& multiplier() const { return shape_; }
  const PoissonOperator& poisson() const { return poisson_; }

  FieldSolution solve(const PhaseSpaceState& s) const {
    s.validate();
    require_finite(s);
    const double length = modes_.length();
    std::span<const Vec3> pts(s.x);
    std::span<const double> w(s.weights());
    FieldSolution out(modes_);
    out.density = plan_ ? plan_->type1<double>(pts, w) : nudft_type1<double>(pts, w, modes_);
    out.density.kind = SpectrumKind::Density;

    FieldSpectrum ex(modes_, SpectrumKind::FieldX), ey(modes_, SpectrumKind::FieldY), ez(modes_, SpectrumKind::FieldZ);
    double energy = 0.0, energy_z = 0.0;
    for (std::size_t f = 0; f < modes_.size(); ++f) {
      const cplx rho = s.charge * shape_[f] * out.density.coeffs[f];
      out.density.coeffs[f] = rho;
      const Vec3& g = poisson_.gradient(f);
      const double r2 = std::norm(rho);
      energy += dot(g, g) * r2;
      energy_z += g.z * g.z * r2;
      const cplx e = cplx(rho.imag(), -rho.real()) * shape_[f];  // -i rho S
      ex.coeffs[f] = g.x * e;
      ey.coeffs[f] = g.y * e;
      ez.coeffs[f] = g.z * e;
    }
    const double volume = length * length * length;
    out.field_energy = 0.5 * volume * energy;
    out.field_energy_z = 0.5 * volume * energy_z;
    out.measured_charge = volume * out.density.coeffs[modes_.zero_index()].real();

    double max_imag = 0.0, max_real = 0.0;
    if (plan_) {
      out.field = plan_->type2_real3({&ex, &ey, &ez}, pts, &max_imag, &max_real);
    } else {
      out.field = nudft_type2_real3({&ex, &ey, &ez}, pts, &max_imag);
      for (const auto& e : out.field) max_real = std::max({max_real, std::abs(e.x), std::abs(e.y), std::abs(e.z)});
    }
    detail::check_realness(max_imag, max_real, detail::field_scale(s, length));
    return out;
  }

 private:
  PropagatorConfig cfg_;
  ModeSet modes_;
  std::vector<double> shape_;
  PoissonOperator poisson_;
  std::optional<NufftPlan> plan_;
};

/// Self-consistent PIF field at each particle.
inline std::vector<Vec3> pif_field_at_particles(const PhaseSpaceState& s, const PropagatorConfig& cfg, double length) {
  return PifFieldSolver(cfg, length).solve(s).field;
}

}  // namespace parapif
