// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "parapif/diagnostics.hpp"
#include "parapif/pic.hpp"
#include "parapif/pif.hpp"
#include "parapif/sampling.hpp"

using namespace parapif;
using oracle::cplx;

namespace {

PropagatorConfig config(Scheme scheme, int n, double eps = 1e-6, int m = 1) {
  PropagatorConfig c;
  c.scheme = scheme;
  c.modes = n;
  c.spline_order = m;
  c.nufft_tolerance = eps;
  return c;
}

PhaseSpaceState random_state(std::size_t np, double length, std::uint64_t seed, double total = -1.0) {
  auto x = oracle::random_points(np, length, seed);
  std::vector<Vec3> v(np);
  std::vector<double> w(np, std::abs(total) / static_cast<double>(np));
  return PhaseSpaceState(std::move(x), std::move(v), std::move(w));
}

/// n^3 particles at cell centres (offset 0.5) or nodes (offset 0).
PhaseSpaceState lattice(int n, double length, double offset) {
  std::vector<Vec3> x;
  const double h = length / n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) x.push_back({(a + offset) * h, (b + offset) * h, (c + offset) * h});
  const std::size_t np = x.size();
  return PhaseSpaceState(std::move(x), std::vector<Vec3>(np), std::vector<double>(np, std::pow(length, 3) / double(np)));
}

double max_norm(const std::vector<Vec3>& e) {
  double m = 0.0;
  for (const auto& v : e) m = std::max(m, norm(v));
  return m;
}

}  // namespace

TEST(PoissonOperator, AntiHermitianWithInverseWavenumberMagnitude) {
  const int n = 8;
  ModeSet modes(n, 3.0);
  PoissonOperator op(modes);
  for (std::size_t f = 0; f < modes.size(); ++f) {
    const auto t = modes.triple(f);
    const auto e = op.entry(f);
    if (modes.is_nyquist(f) || f == modes.zero_index()) {
      for (const auto& z : e) EXPECT_EQ(z, cplx(0.0));
      continue;
    }
    const auto em = op.entry(modes.flat(-t[0], -t[1], -t[2]));
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(em[d], std::conj(e[d]));
    const double mag = std::sqrt(std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]));
    EXPECT_NEAR(mag, 1.0 / norm(modes.wavenumber(f)), 1e-15);
  }
}

TEST(PifField, LatticeIsFieldFree) {
  const double L = 2.0 * oracle::kPi;
  const auto s = lattice(8, L, 0.5);
  for (Scheme sc : {Scheme::PifNudft, Scheme::PifNufft}) {
    const auto e = pif_field_at_particles(s, config(sc, 8, 1e-10), L);
    EXPECT_LE(max_norm(e), 1e-10 * std::abs(total_charge(s)) / (L * L));
  }
}

TEST(PifField, TwoParticlesActAndReact) {
  const double L = 1.0;
  std::vector<Vec3> x{{0.2, 0.3, 0.4}, {0.7, 0.1, 0.55}};
  PhaseSpaceState s(x, std::vector<Vec3>(2), {1.0, 1.0});
  // Field of B at A is E(A) minus A's own contribution, which vanishes by symmetry.
  const auto cfg = config(Scheme::PifNudft, 8);
  const auto both = pif_field_at_particles(s, cfg, L);
  EXPECT_LT(norm(both[0] + both[1]), 1e-13 * norm(both[0]));
  PhaseSpaceState a({x[0]}, {Vec3{}}, {1.0}), b({x[1]}, {Vec3{}}, {1.0});
  EXPECT_LT(max_norm(pif_field_at_particles(a, cfg, L)), 1e-13);
  EXPECT_LT(max_norm(pif_field_at_particles(b, cfg, L)), 1e-13);
}

TEST(PifField, NudftMatchesTripleLoop) {
  const double L = 2.5;
  for (int m : {1, 3}) {
    const auto s = random_state(100, L, 60 + m, -7.0);
    const auto got = pif_field_at_particles(s, config(Scheme::PifNudft, 4, 1e-6, m), L);
    const auto want = oracle::pif_field(s.x, s.weights(), s.charge, m, 4, L);
    EXPECT_LT(oracle::max_rel_diff(got, want), 1e-12) << "m=" << m;
  }
}

TEST(PifField, NufftMatchesNudft) {
  const double L = 4.0 * oracle::kPi;
  const auto s = random_state(400, L, 61, -std::pow(L, 3));
  const auto exact = pif_field_at_particles(s, config(Scheme::PifNudft, 8), L);
  EXPECT_LT(oracle::max_rel_diff(pif_field_at_particles(s, config(Scheme::PifNufft, 8, 1e-6), L), exact), 1e-5);
  double prev = 1.0;
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const double err = oracle::max_rel_diff(pif_field_at_particles(s, config(Scheme::PifNufft, 8, eps), L), exact);
    EXPECT_LE(err, prev) << eps;
    prev = err;
  }
}

TEST(PifField, WeightedFieldSumsToZero) {
  const double L = 3.0;
  const auto s = random_state(300, L, 62);
  for (Scheme sc : {Scheme::PifNudft, Scheme::PifNufft}) {
    const auto e = pif_field_at_particles(s, config(sc, 8, 1e-8), L);
    Vec3 sum;
    double scale = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      sum += s.weights()[j] * e[j];
      scale += s.weights()[j] * norm(e[j]);
    }
    EXPECT_LT(norm(sum), 1e-12 * scale);
  }
}

TEST(PifField, BadToleranceIsConfigurationError) {
  auto c = config(Scheme::PifNufft, 8, 1e-6);
  c.nufft_tolerance = 0.3;
  EXPECT_THROW(PifFieldSolver(c, 1.0), ConfigurationError);
}

TEST(PicField, CellCentreLatticeIsFieldFree) {
  const double L = 3.0;
  const auto s = lattice(8, L, 0.5);
  EXPECT_LT(max_norm(pic_field_at_particles(s, config(Scheme::Pic, 8), L)), 1e-12);
}

TEST(PicField, DepositConservesCharge) {
  const double L = 2.0;
  PhaseSpaceState s({Vec3{0.31, 1.77, 0.02}}, {Vec3{}}, {0.6});
  PicFieldSolver pic(config(Scheme::Pic, 8), L);
  const auto rho = pic.deposit(s);
  double sum = 0.0;
  for (double r : rho.values) sum += r;
  EXPECT_NEAR(sum * std::pow(pic.h(), 3), -0.6, 1e-15);
}

TEST(PicField, MatchesDenseMatrixOperator) {
  const double L = 2.0;
  for (int m : {1, 2}) {
    const auto s = random_state(100, L, 70 + m, -3.0);
    const auto got = pic_field_at_particles(s, config(Scheme::Pic, 8, 1e-6, m), L);
    const auto want = oracle::pic_field(s.x, s.weights(), s.charge, m, 8, L);
    EXPECT_LT(oracle::max_rel_diff(got, want), 1e-11) << "m=" << m;
  }
}

TEST(PicField, DepositGatherAdjoint) {
  const double L = 2.0;
  const int n = 8;
  PicFieldSolver pic(config(Scheme::Pic, n, 1e-6, 3), L);
  const auto s = random_state(50, L, 73);
  const auto rho = pic.deposit(s);
  std::array<GridField, 3> g{GridField(n, L), GridField(n, L), GridField(n, L)};
  for (std::size_t d = 0; d < 3; ++d) g[d].values = oracle::random_real(g[d].values.size(), 80 + d);
  const auto e = pic.gather({&g[0], &g[1], &g[2]}, s.x);
  const double h3 = std::pow(pic.h(), 3);
  // <deposit(s), g_d> h^3 = sum_j q w_j gather(g)_d(x_j)
  for (std::size_t d = 0; d < 3; ++d) {
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < rho.values.size(); ++i) lhs += rho.values[i] * g[d].values[i] * h3;
    for (std::size_t j = 0; j < s.size(); ++j) rhs += s.charge * s.weights()[j] * e[j][d];
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs) + 1e-14);
  }
}

TEST(PicField, ConstantGridGathersExactly) {
  const double L = 1.0;
  const int n = 8;
  PicFieldSolver pic(config(Scheme::Pic, n, 1e-6, 5), L);
  std::array<GridField, 3> g{GridField(n, L), GridField(n, L), GridField(n, L)};
  for (std::size_t d = 0; d < 3; ++d)
    for (auto& v : g[d].values) v = 1.0 + d;
  for (const auto& e : pic.gather({&g[0], &g[1], &g[2]}, oracle::random_points(20, L, 74))) {
    EXPECT_NEAR(e.x, 1.0, 1e-14);
    EXPECT_NEAR(e.z, 3.0, 1e-14);
  }
}

TEST(PicField, ConvergesToPifAtSecondOrder) {
  // Quiet start of 1 + a cos(wx): uniform lattice, weights carry the
  // density. The lattice harmonics sit at k = 0 or on Nyquist planes for
  // every grid, so only the smooth mode is seen.
  const double w = 0.5, L = 2.0 * oracle::kPi / w, alpha = 0.1;
  std::vector<Vec3> x;
  std::vector<double> q;
  for (int i = 0; i < 128; ++i) {
    const double xi = (i + 0.5) * L / 128.0;
    for (int j = 0; j < 16; ++j)
      for (int k = 0; k < 16; ++k) {
        x.push_back({xi, (j + 0.5) * L / 16.0, (k + 0.5) * L / 16.0});
        q.push_back(1.0 + alpha * std::cos(w * xi));
      }
  }
  const std::size_t np = x.size();
  PhaseSpaceState s(std::move(x), std::vector<Vec3>(np), std::move(q));
  std::vector<double> hs, errs;
  for (int n : {8, 16, 32}) {
    const auto pic = pic_field_at_particles(s, config(Scheme::Pic, n), L);
    const auto pif = pif_field_at_particles(s, config(Scheme::PifNudft, n), L);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      num += dot(pic[j] - pif[j], pic[j] - pif[j]);
      den += dot(pif[j], pif[j]);
    }
    hs.push_back(L / n);
    errs.push_back(std::sqrt(num / den));
  }
  EXPECT_NEAR(fit_power_law(hs, errs), 2.0, 0.4) << errs[0] << " " << errs[1] << " " << errs[2];
}

TEST(PicField, RejectsNonPowerOfTwo) {
  EXPECT_THROW(PicFieldSolver(config(Scheme::Pic, 12), 1.0), ConfigurationError);
}

TEST(FieldEnergy, PicParsevalMatchesGridQuadrature) {
  const double L = 2.0;
  const int n = 8;
  const auto s = random_state(200, L, 75, -5.0);
  const auto sol = PicFieldSolver(config(Scheme::Pic, n, 1e-6, 2), L).solve(s);
  const auto p = oracle::dense_shape_matrix(s.x, 2, n, L);
  const auto eg = oracle::pic_grid_field(p, s.x, s.weights(), s.charge, n, L);
  const double h3 = std::pow(L / n, 3);
  double quad = 0.0, quad_z = 0.0;
  for (std::size_t g = 0; g < eg[0].size(); ++g) {
    quad += 0.5 * h3 * (eg[0][g] * eg[0][g] + eg[1][g] * eg[1][g] + eg[2][g] * eg[2][g]);
    quad_z += 0.5 * h3 * eg[2][g] * eg[2][g];
  }
  EXPECT_NEAR(sol.field_energy, quad, 1e-8 * quad);
  EXPECT_NEAR(sol.field_energy_z, quad_z, 1e-8 * quad_z);
}

TEST(FieldEnergy, PifParsevalMatchesModeSum) {
  // (1/2) int |E|^2 over the box for E = sum_k E_k e^{ikx}: L^3/2 sum |E_k|^2.
  const double L = 2.0;
  const int n = 4;
  const auto s = random_state(60, L, 76, -2.0);
  const auto sol = PifFieldSolver(config(Scheme::PifNudft, n), L).solve(s);
  const auto ks = oracle::modes(n);
  const auto rho = oracle::type1(s.x, s.weights(), n, L);
  const double u = 2.0 * oracle::kPi / L, h = L / n;
  double want = 0.0;
  for (std::size_t f = 0; f < ks.size(); ++f) {
    if ((ks[f] == std::array<int, 3>{0, 0, 0}) || oracle::nyquist(ks[f], n)) continue;
    double sk = 1.0;
    for (int d = 0; d < 3; ++d) sk *= std::pow(oracle::sinc(0.5 * u * ks[f][d] * h), 2);
    const double k2 = u * u * (ks[f][0] * ks[f][0] + ks[f][1] * ks[f][1] + ks[f][2] * ks[f][2]);
    want += 0.5 * L * L * L * std::norm(s.charge * sk * rho[f]) / k2;
  }
  EXPECT_NEAR(sol.field_energy, want, 1e-12 * want);
}

TEST(ChargeK0, NudftExactNufftWithinTolerance) {
  const double L = 4.0 * oracle::kPi;
  const auto s = random_state(500, L, 77, -std::pow(L, 3));
  const auto exact = PifFieldSolver(config(Scheme::PifNudft, 8), L).solve(s);
  EXPECT_LE(conserved_quantities(s, exact).charge_k0_error, 1e-13);
  const auto loose = PifFieldSolver(config(Scheme::PifNufft, 8, 1e-3), L).solve(s);
  EXPECT_LE(conserved_quantities(s, loose).charge_k0_error, 1e-2);
}
