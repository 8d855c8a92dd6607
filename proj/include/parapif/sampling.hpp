// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Initial conditions for the three benchmark problems, sampled by inverse
// transform. Random numbers come from a counter-based generator: the
// SplitMix64 finalizer applied to (seed, stream, particle index), so sample j
// does not depend on how many particles are drawn.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "parapif/core.hpp"

namespace parapif {

namespace rng {

constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform in (0, 1), a pure function of its arguments.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = mix(seed ^ mix(stream * 0xd1b54a32d192ed03ULL));
  const std::uint64_t bits = mix(key ^ mix(index));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on streams (2s, 2s+1).
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform(seed, 2 * stream, index);
  const double u2 = uniform(seed, 2 * stream + 1, index);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

enum class ScenarioKind { LandauDamping, TwoStream, PenningTrap };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::LandauDamping: return "landau";
    case ScenarioKind::TwoStream: return "two_stream";
    case ScenarioKind::PenningTrap: return "penning";
  }
  return "unknown";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "landau") return ScenarioKind::LandauDamping;
  if (s == "two_stream") return ScenarioKind::TwoStream;
  if (s == "penning") return ScenarioKind::PenningTrap;
  throw ArgumentError("unknown scenario '" + s + "' (expected landau, two_stream or penning)");
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::LandauDamping;
  double alpha = 0.05;       // density perturbation amplitude
  double wavenumber = 0.5;   // w; L = 2 pi / w for the periodic problems
  double sigma = 1.0;        // thermal velocity spread
  Vec3 beam1{};              // beam drift velocities (two-stream)
  Vec3 beam2{};
  double length = 4.0 * std::numbers::pi;
  double total_charge = -std::pow(4.0 * std::numbers::pi, 3);
  Vec3 position_mean{};
  Vec3 position_std{};
  std::uint64_t seed = 1;

  static Scenario landau(std::uint64_t seed = 1) {
    Scenario s;
    s.kind = ScenarioKind::LandauDamping;
    s.seed = seed;
    return s;
  }

  static Scenario two_stream(std::uint64_t seed = 1) {
    Scenario s;
    s.kind = ScenarioKind::TwoStream;
    s.alpha = 0.01;
    s.sigma = 0.1;
    s.beam1 = {0.0, 0.0, -0.5 * std::numbers::pi};
    s.beam2 = {0.0, 0.0, 0.5 * std::numbers::pi};
    s.seed = seed;
    return s;
  }

  static Scenario penning(std::uint64_t seed = 1) {
    Scenario s;
    s.kind = ScenarioKind::PenningTrap;
    s.alpha = 0.0;
    s.length = 25.0;
    s.total_charge = -1562.5;
    s.position_mean = {12.5, 12.5, 12.5};
    s.position_std = {2.0, 1.0, 3.0};
    s.seed = seed;
    return s;
  }

  Domain domain() const { return Domain(length); }

  std::optional<ExternalFields> external_fields() const {
    if (kind == ScenarioKind::PenningTrap) return ExternalFields::penning(length);
    return std::nullopt;
  }

  void validate() const {
    if (!(length > 0.0)) throw ConfigurationError("scenario length must be positive");
    if (kind != ScenarioKind::PenningTrap) {
      if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigurationError("perturbation amplitude must lie in [0, 1)");
      if (!(wavenumber > 0.0)) throw ConfigurationError("wavenumber must be positive");
      if (std::abs(wavenumber * length - 2.0 * std::numbers::pi) > 1e-12 * length) {
        throw ConfigurationError("periodic scenarios need length = 2 pi / wavenumber");
      }
    }
    if (!(sigma > 0.0)) throw ConfigurationError("velocity spread must be positive");
  }
};

/// Inverts F(x) = x/L + (alpha / (w L)) sin(w x) = u on [0, L] by Newton.
/// `residual` receives |F(x) - u|.
inline double invert_perturbed_cdf(double u, double alpha, double w, double length, double* residual = nullptr) {
  double x = u * length;
  double r = 0.0;
  for (int it = 0; it < 50; ++it) {
    r = x / length + alpha / (w * length) * std::sin(w * x) - u;
    if (std::abs(r) <= 1e-14) break;
    const double d = (1.0 + alpha * std::cos(w * x)) / length;
    x -= r / d;
  }
  r = x / length + alpha / (w * length) * std::sin(w * x) - u;
  if (!(std::abs(r) <= 1e-12)) throw NumericError("CDF inversion did not converge");
  if (residual) *residual = std::abs(r);
  return x;
}

namespace detail {

// Stream layout: uniforms 0..2 (positions), 3 (beam choice); normal pairs
// from 8 on (velocities 8..10, Penning positions 11..13).
inline constexpr std::uint64_t kPositionStream = 0;
inline constexpr std::uint64_t kBeamStream = 3;
inline constexpr std::uint64_t kVelocityNormal = 8;
inline constexpr std::uint64_t kPositionNormal = 11;

}  // namespace detail

inline PhaseSpaceState sample(const Scenario& sc, std::size_t np) {
  if (np == 0) throw ArgumentError("need at least one particle");
  sc.validate();
  std::vector<Vec3> x(np), v(np);
  const double L = sc.length;
  for (std::size_t j = 0; j < np; ++j) {
    Vec3 vel;
    for (std::size_t d = 0; d < 3; ++d) vel[d] = sc.sigma * rng::normal(sc.seed, detail::kVelocityNormal + d, j);
    switch (sc.kind) {
      case ScenarioKind::LandauDamping:
        for (std::size_t d = 0; d < 3; ++d) {
          const double u = rng::uniform(sc.seed, detail::kPositionStream + d, j);
          x[j][d] = invert_perturbed_cdf(u, sc.alpha, sc.wavenumber, L);
        }
        break;
      case ScenarioKind::TwoStream: {
        for (std::size_t d = 0; d < 2; ++d) x[j][d] = L * rng::uniform(sc.seed, detail::kPositionStream + d, j);
        x[j].z = invert_perturbed_cdf(rng::uniform(sc.seed, detail::kPositionStream + 2, j), sc.alpha, sc.wavenumber, L);
        vel += rng::uniform(sc.seed, detail::kBeamStream, j) < 0.5 ? sc.beam1 : sc.beam2;
        break;
      }
      case ScenarioKind::PenningTrap:
        for (std::size_t d = 0; d < 3; ++d) {
          x[j][d] = sc.position_mean[d] + sc.position_std[d] * rng::normal(sc.seed, detail::kPositionNormal + d, j);
        }
        break;
    }
    x[j] = wrap_periodic(x[j], L);
    v[j] = vel;
  }
  std::vector<double> w(np, std::abs(sc.total_charge) / static_cast<double>(np));
  return PhaseSpaceState(std::move(x), std::move(v), std::move(w), -1.0, 1.0);
}

}  // namespace parapif
