// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed-step propagators: a field solver (PIF or PIC) driven by the KDK
// pusher over [t0, t1].

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/pic.hpp"
#include "parapif/pif.hpp"
#include "parapif/pusher.hpp"

namespace parapif {

/// Scheme-dispatching field solver.
class FieldSolver {
 public:
  FieldSolver(const PropagatorConfig& cfg, double length) : solver_(make(cfg, length)) {}

  FieldSolution solve(const PhaseSpaceState& s) const {
    return std::visit([&](const auto& impl) { return impl.solve(s); }, solver_);
  }

 private:
  using Impl = std::variant<PifFieldSolver, PicFieldSolver>;
  static Impl make(const PropagatorConfig& cfg, double length) {
    if (cfg.scheme == Scheme::Pic) return PicFieldSolver(cfg, length);
    return PifFieldSolver(cfg, length);
  }
  Impl solver_;
};

/// Called at step 0 and after every step with the state and the self-field
/// solve at that state.
using StepObserver = std::function<void(std::size_t step, double time, const PhaseSpaceState&, const FieldSolution&)>;

class Propagator {
 public:
  Propagator(const PropagatorConfig& cfg, const Domain& domain)
      : cfg_((cfg.validate(), cfg)), domain_(domain), solver_(cfg, domain.length) {}

  const PropagatorConfig& config() const { return cfg_; }
  const Domain& domain() const { return domain_; }

  /// Number of steps covering [t0, t1]; throws unless it is a whole number.
  std::size_t step_count(double t0, double t1) const {
    const double span = t1 - t0;
    const double steps = std::nearbyint(span / cfg_.dt);
    if (steps < 0.0 || std::abs(steps * cfg_.dt - span) > 1e-9 * std::max(cfg_.dt, std::abs(span))) {
      throw ConfigurationError("interval [" + std::to_string(t0) + ", " + std::to_string(t1) +
                               "] is not a whole number of steps of " + std::to_string(cfg_.dt));
    }
    return static_cast<std::size_t>(steps);
  }

  FieldSolution solve(const PhaseSpaceState& s) const { return solver_.solve(s); }

  PhaseSpaceState propagate(const PhaseSpaceState& s, double t0, double t1, const StepObserver& observe = {}) const {
    const std::size_t steps = step_count(t0, t1);
    PhaseSpaceState out = s;
    if (steps == 0 && !observe) return out;
    const ExternalFields* ext = cfg_.external ? &*cfg_.external : nullptr;
    FieldSolution last = solver_.solve(out);
    auto self_field = [&](const PhaseSpaceState& st) {
      last = solver_.solve(st);
      return observe ? last.field : std::move(last.field);
    };
    if (observe) observe(0, t0, out, last);
    std::vector<Vec3> e = observe ? last.field : std::move(last.field);
    detail::add_external(e, out.x, ext);
    for (std::size_t i = 1; i <= steps; ++i) {
      kdk_advance(out, e, self_field, ext, cfg_.dt, domain_.length);
      if (observe) observe(i, t0 + static_cast<double>(i) * cfg_.dt, out, last);
    }
    return out;
  }

 private:
  PropagatorConfig cfg_;
  Domain domain_;
  FieldSolver solver_;
};

inline PhaseSpaceState propagate(const PropagatorConfig& cfg, const Domain& domain, const PhaseSpaceState& s,
                                 double t0, double t1) {
  return Propagator(cfg, domain).propagate(s, t0, t1);
}

}  // namespace parapif
