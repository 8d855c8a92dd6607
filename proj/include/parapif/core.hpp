// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared domain types: 3-vectors, the periodic box, particle phase-space
// state, external fields and propagator configuration.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace parapif {

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments to a pure function (sizes, ranges).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A propagator or run configuration that cannot be executed.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Iterative numerics that failed to converge or produced non-finite data.
class NumericError : public Error {
 public:
  using Error::Error;
};

//---------------------------------------------------------------------------//
// Vec3
//---------------------------------------------------------------------------//

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

//---------------------------------------------------------------------------//
// Periodic box
//---------------------------------------------------------------------------//

/// Cubic periodic box [0, L)^3.
struct Domain {
  double length = 1.0;

  explicit Domain(double side) : length(side) {
    if (!(side > 0.0) || !std::isfinite(side)) {
      throw ArgumentError("domain length must be positive and finite");
    }
  }
  double volume() const { return length * length * length; }
};

/// Maps a coordinate into [0, L).
inline double wrap_coordinate(double x, double length) {
  double r = x - length * std::floor(x / length);
  // floor() can leave r == length when x is a tiny negative number.
  if (r >= length) r -= length;
  if (r < 0.0) r = 0.0;
  return r;
}

inline Vec3 wrap_periodic(const Vec3& x, double length) {
  return {wrap_coordinate(x.x, length), wrap_coordinate(x.y, length), wrap_coordinate(x.z, length)};
}

/// Shortest periodic representative of a displacement, in [-L/2, L/2].
inline double minimum_image(double d, double length) { return d - length * std::nearbyint(d / length); }

inline Vec3 minimum_image(const Vec3& d, double length) {
  return {minimum_image(d.x, length), minimum_image(d.y, length), minimum_image(d.z, length)};
}

//---------------------------------------------------------------------------//
// Phase-space state
//---------------------------------------------------------------------------//

/// Positions and velocities of all macro-particles plus their (immutable,
/// shared) charge weights. Index order is particle identity.
struct PhaseSpaceState {
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  std::shared_ptr<const std::vector<double>> w;
  double charge = -1.0;      // q_e
  double q_over_m = -1.0;    // q_e / m_e
  double mass = 1.0;         // m_e

  PhaseSpaceState() = default;
  PhaseSpaceState(std::vector<Vec3> positions, std::vector<Vec3> velocities, std::vector<double> weights,
                  double q = -1.0, double m = 1.0)
      : x(std::move(positions)),
        v(std::move(velocities)),
        w(std::make_shared<const std::vector<double>>(std::move(weights))),
        charge(q),
        q_over_m(q / m),
        mass(m) {
    validate();
  }

  std::size_t size() const { return x.size(); }
  const std::vector<double>& weights() const { return *w; }

  void validate() const {
    if (x.empty()) throw ArgumentError("phase-space state needs at least one particle");
    if (x.size() != v.size()) throw ArgumentError("position and velocity arrays differ in length");
    if (!w || w->size() != x.size()) throw ArgumentError("weight array length differs from particle count");
  }
};

/// Throws NumericError unless every coordinate is finite.
inline void require_finite(const PhaseSpaceState& s) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Vec3& x = s.x[j];
    const Vec3& v = s.v[j];
    if (!std::isfinite(x.x + x.y + x.z + v.x + v.y + v.z)) {
      throw NumericError("non-finite particle state at index " + std::to_string(j));
    }
  }
}

/// Q_e = q_e * sum_j w_j.
inline double total_charge(const PhaseSpaceState& s, double q_e) {
  s.validate();
  double sum = 0.0;
  for (double wj : s.weights()) sum += wj;
  return q_e * sum;
}

inline double total_charge(const PhaseSpaceState& s) { return total_charge(s, s.charge); }

/// Writes "index,x,y,z,vx,vy,vz" rows; values round-trip exactly.
inline void write_state_csv(const PhaseSpaceState& s, std::ostream& out) {
  out << "index,x,y,z,vx,vy,vz\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < s.size(); ++j) {
    out << j << ',' << s.x[j].x << ',' << s.x[j].y << ',' << s.x[j].z << ',' << s.v[j].x << ','
        << s.v[j].y << ',' << s.v[j].z << '\n';
  }
}

/// Reads positions and velocities written by write_state_csv. Weights, charge
/// and mass are taken from `like`, which must have the same particle count.
inline PhaseSpaceState read_state_csv(std::istream& in, const PhaseSpaceState& like) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("state csv: missing header");
  PhaseSpaceState s = like;
  s.x.clear();
  s.v.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::array<double, 7> f{};
    for (std::size_t i = 0; i < f.size(); ++i) {
      std::string cell;
      if (!std::getline(row, cell, ',')) throw ArgumentError("state csv: short row");
      f[i] = std::stod(cell);
    }
    if (static_cast<std::size_t>(f[0]) != s.x.size()) throw ArgumentError("state csv: index out of order");
    s.x.push_back({f[1], f[2], f[3]});
    s.v.push_back({f[4], f[5], f[6]});
  }
  s.validate();
  return s;
}

//---------------------------------------------------------------------------//
// External fields
//---------------------------------------------------------------------------//

/// Uniform B field plus an affine electric field E(x) = A x + b.
struct ExternalFields {
  Vec3 magnetic{};
  std::array<Vec3, 3> e_matrix{};  // rows of A
  Vec3 e_offset{};

  bool has_magnetic() const { return magnetic.x != 0.0 || magnetic.y != 0.0 || magnetic.z != 0.0; }
  bool has_electric() const {
    for (const auto& r : e_matrix) {
      if (r.x != 0.0 || r.y != 0.0 || r.z != 0.0) return true;
    }
    return e_offset.x != 0.0 || e_offset.y != 0.0 || e_offset.z != 0.0;
  }

  Vec3 electric(const Vec3& x) const {
    return {dot(e_matrix[0], x) + e_offset.x, dot(e_matrix[1], x) + e_offset.y,
            dot(e_matrix[2], x) + e_offset.z};
  }

  /// Quadrupole trap: E = (-a(x-c), -a(y-c), 2a(z-c)) with a = 15/L, c = L/2,
  /// and B = (0, 0, bz).
  static ExternalFields penning(double length, double bz = 5.0) {
    ExternalFields f;
    const double a = 15.0 / length;
    const double c = 0.5 * length;
    f.magnetic = {0.0, 0.0, bz};
    f.e_matrix = {Vec3{-a, 0.0, 0.0}, Vec3{0.0, -a, 0.0}, Vec3{0.0, 0.0, 2.0 * a}};
    f.e_offset = {a * c, a * c, -2.0 * a * c};
    return f;
  }
};

//---------------------------------------------------------------------------//
// Propagator configuration
//---------------------------------------------------------------------------//

enum class Scheme { PifNudft, PifNufft, Pic };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::PifNudft: return "pif_nudft";
    case Scheme::PifNufft: return "pif_nufft";
    case Scheme::Pic: return "pic";
  }
  return "unknown";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "pif_nudft") return Scheme::PifNudft;
  if (s == "pif_nufft") return Scheme::PifNufft;
  if (s == "pic") return Scheme::Pic;
  throw ArgumentError("unknown scheme '" + s + "' (expected pif_nudft, pif_nufft or pic)");
}

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

/// Everything that defines a fine or coarse propagator.
struct PropagatorConfig {
  Scheme scheme = Scheme::PifNufft;
  int modes = 16;             // N: Fourier modes or grid points per dimension
  int spline_order = 1;       // m
  double dt = 0.05;
  double nufft_tolerance = 1e-6;
  std::optional<ExternalFields> external;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("time step must be positive");
    if (modes < 2 || modes % 2 != 0) throw ConfigurationError("mode count per dimension must be even and >= 2");
    if (spline_order < 1) throw ConfigurationError("spline order must be >= 1");
    if (scheme == Scheme::PifNufft && !(nufft_tolerance > 1e-15 && nufft_tolerance < 1e-1)) {
      throw ConfigurationError("NUFFT tolerance must lie in (1e-15, 1e-1)");
    }
    if (scheme == Scheme::Pic && !is_power_of_two(static_cast<std::size_t>(modes))) {
      throw ConfigurationError("PIC grid size must be a power of two");
    }
  }
};

/// Coarse/fine pairing rule for two PIF configurations.
inline void validate_coarse_fine(const PropagatorConfig& coarse, const PropagatorConfig& fine) {
  coarse.validate();
  fine.validate();
  if (coarse.scheme == Scheme::PifNufft && fine.scheme == Scheme::PifNufft &&
      coarse.nufft_tolerance < fine.nufft_tolerance) {
    throw ConfigurationError("coarse NUFFT tolerance must not be tighter than the fine tolerance");
  }
}

}  // namespace parapif
