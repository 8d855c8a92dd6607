// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Kick-drift-kick Boris step with positions and velocities at integer steps.
//
//   v-      = v_n + (dt/2) a E_n
//   x_{n+1} = wrap(x_n + dt (v- + (dt/2) a v_n x B))
//   v+      = boris_rotate(v-, B, dt)
//   v_{n+1} = v+ + (dt/2) a E_{n+1}
//
// with a = q/m and E = E_self + E_ext. For B = 0 this is velocity Verlet.

#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "parapif/core.hpp"

namespace parapif {

/// Rotates v by the magnetic field over one step (|v| is preserved exactly
/// up to round-off).
inline Vec3 boris_rotate(const Vec3& v, const Vec3& b, double q_over_m, double dt) {
  const Vec3 t = (0.5 * q_over_m * dt) * b;
  const Vec3 s = (2.0 / (1.0 + dot(t, t))) * t;
  const Vec3 vp = v + cross(v, t);
  return v + cross(vp, s);
}

namespace detail {

inline void add_external(std::span<Vec3> e, const std::vector<Vec3>& x, const ExternalFields* ext) {
  if (!ext || !ext->has_electric()) return;
  for (std::size_t j = 0; j < x.size(); ++j) e[j] += ext->electric(x[j]);
}

}  // namespace detail

/// Advances `s` in place by one step. `e_now` holds the total field at the
/// current positions on entry and at the new positions on exit.
/// `self_field(state)` returns the self-consistent field at the particles.
template <class SelfField>
void kdk_advance(PhaseSpaceState& s, std::vector<Vec3>& e_now, SelfField&& self_field, const ExternalFields* ext,
                 double dt, double length) {
  const double a = s.q_over_m;
  const double half = 0.5 * dt * a;
  const bool magnetic = ext && ext->has_magnetic();
  const Vec3 b = magnetic ? ext->magnetic : Vec3{};
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Vec3 vm = s.v[j] + half * e_now[j];
    Vec3 drift = vm;
    if (magnetic) drift += half * cross(s.v[j], b);
    s.x[j] = wrap_periodic(s.x[j] + dt * drift, length);
    s.v[j] = magnetic ? boris_rotate(vm, b, a, dt) : vm;
  }
  e_now = self_field(s);
  detail::add_external(e_now, s.x, ext);
  for (std::size_t j = 0; j < s.size(); ++j) s.v[j] += half * e_now[j];
}

/// Total field (self + external) at the particles.
template <class SelfField>
std::vector<Vec3> total_field(const PhaseSpaceState& s, SelfField&& self_field, const ExternalFields* ext) {
  std::vector<Vec3> e = self_field(s);
  detail::add_external(e, s.x, ext);
  return e;
}

/// One KDK step returning the new state.
template <class SelfField>
PhaseSpaceState step_kdk(const PhaseSpaceState& s, SelfField&& self_field, const ExternalFields* ext, double dt,
                         const Domain& domain) {
  PhaseSpaceState out = s;
  std::vector<Vec3> e = total_field(s, self_field, ext);
  kdk_advance(out, e, self_field, ext, dt, domain.length);
  return out;
}

}  // namespace parapif
