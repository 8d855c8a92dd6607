// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run harness: the flat configuration schema, run drivers (serial,
// parareal, conservation, sweep, heatmap) and their CSV outputs.
//
// Configuration values arrive as a map from dotted key ("fine.dt") to text;
// config_file.hpp produces that map from an INI file.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/diagnostics.hpp"
#include "parapif/parareal.hpp"
#include "parapif/propagator.hpp"
#include "parapif/sampling.hpp"

#ifndef PARAPIF_VERSION
#define PARAPIF_VERSION "0.1.0"
#endif

namespace parapif::harness {

//---------------------------------------------------------------------------//
// Schema
//---------------------------------------------------------------------------//

struct KeySpec {
  const char* key;
  const char* fallback;  // "" = optional, no default
  const char* help;
};

inline const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"run.mode", "parareal", "serial | parareal | conservation | sweep | heatmap"},
      {"run.scenario", "landau", "landau | two_stream | penning"},
      {"run.seed", "1", "sampling seed (unsigned 64-bit)"},
      {"run.particles_per_cell", "10", "P_c; particle count is P_c * fine.modes^3"},
      {"run.particles", "0", "explicit particle count; overrides run.particles_per_cell when > 0"},
      {"run.t_start", "0", "start time"},
      {"run.t_end", "4.8", "end time"},
      {"run.output_dir", "parapif-out", "output directory (the --output-dir flag takes precedence)"},
      {"scenario.alpha", "", "density perturbation amplitude (landau, two_stream)"},
      {"scenario.wavenumber", "", "perturbation wavenumber w; sets L = 2 pi / w (landau, two_stream)"},
      {"scenario.sigma", "", "thermal velocity spread"},
      {"fine.scheme", "pif_nufft", "pif_nudft | pif_nufft | pic"},
      {"fine.modes", "16", "modes (PIF) or grid points (PIC) per dimension"},
      {"fine.spline_order", "1", "B-spline shape order m"},
      {"fine.dt", "0.05", "fine time step"},
      {"fine.tolerance", "1e-6", "NUFFT tolerance (pif_nufft only)"},
      {"coarse.scheme", "pic", "pif_nudft | pif_nufft | pic"},
      {"coarse.modes", "16", "modes or grid points per dimension"},
      {"coarse.spline_order", "1", "B-spline shape order m"},
      {"coarse.dt", "0.05", "coarse time step"},
      {"coarse.tolerance", "1e-2", "NUFFT tolerance (pif_nufft only)"},
      {"parareal.subdomains", "8", "number of time subdomains"},
      {"parareal.tolerance", "1e-11", "stopping tolerance"},
      {"parareal.blocks", "1", "number of sequential windows; must divide parareal.subdomains"},
      {"parareal.max_iterations", "0", "iteration cap per window (0: subdomains per window)"},
      {"parareal.executor", "auto", "auto | concurrent | sequential"},
      {"sweep.axis", "pc", "pc | h | dt_g | epsilon"},
      {"sweep.values", "", "comma-separated values of the swept parameter"},
      {"heatmap.coarse", "pic, pif_nufft:1e-2, pif_nufft:1e-3", "coarse variants: pic or pif_nufft:<tolerance>"},
      {"heatmap.ratios", "1, 2, 4, 8", "coarse/fine time-step ratios"},
      {"output.trace", "true", "record per-step fine-solve energies"},
      {"output.conservation", "true", "record conserved quantities at subdomain boundaries"},
      {"output.final_state", "false", "write the final phase-space state"},
  };
  return keys;
}

inline bool is_known_key(const std::string& key) {
  if (key.rfind("manifest.", 0) == 0) return true;
  return std::any_of(schema().begin(), schema().end(), [&](const KeySpec& k) { return key == k.key; });
}

/// Invalid configuration, naming the offending keys.
class ConfigError : public ConfigurationError {
 public:
  ConfigError(std::vector<std::string> keys, const std::string& what)
      : ConfigurationError(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

using RawConfig = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError({key}, "expected a finite number, got '" + text + "'");
  }
  return v;
}

inline long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError({key}, "expected an integer, got '" + text + "'");
  return v;
}

inline bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError({key}, "expected true or false, got '" + text + "'");
}

inline std::string format_double(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Resolved configuration
//---------------------------------------------------------------------------//

enum class Mode { Serial, Parareal, Conservation, Sweep, Heatmap };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Serial: return "serial";
    case Mode::Parareal: return "parareal";
    case Mode::Conservation: return "conservation";
    case Mode::Sweep: return "sweep";
    case Mode::Heatmap: return "heatmap";
  }
  return "unknown";
}

enum class SweepAxis { Pc, H, DtG, Epsilon };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Pc: return "pc";
    case SweepAxis::H: return "h";
    case SweepAxis::DtG: return "dt_g";
    case SweepAxis::Epsilon: return "epsilon";
  }
  return "unknown";
}

struct CoarseVariant {
  Scheme scheme = Scheme::Pic;
  double tolerance = 0.0;  // pif_nufft only
};

struct RunConfig {
  RawConfig raw;  // every schema key, resolved
  Mode mode = Mode::Parareal;
  Scenario scenario;
  double particles_per_cell = 10.0;
  std::size_t particles = 0;
  double t_start = 0.0;
  double t_end = 4.8;
  std::string output_dir;
  PropagatorConfig fine;
  PropagatorConfig coarse;
  int subdomains = 8;
  PararealOptions parareal;
  SweepAxis sweep_axis = SweepAxis::Pc;
  std::vector<double> sweep_values;
  std::vector<CoarseVariant> heatmap_coarse;
  std::vector<int> heatmap_ratios;
  bool final_state = false;
  std::vector<std::string> warnings;

  /// Particle count for a fine mode count.
  std::size_t particle_count(int modes) const {
    if (particles > 0) return particles;
    const double n = particles_per_cell * std::pow(static_cast<double>(modes), 3);
    return static_cast<std::size_t>(std::llround(n));
  }

  TimePartition partition() const {
    return {t_start, t_end, subdomains, fine.dt, coarse.dt};
  }
};

namespace detail {

inline Scheme parse_scheme(const std::string& key, const std::string& v) {
  try {
    return scheme_from_string(trim(v));
  } catch (const ArgumentError& e) {
    throw ConfigError({key}, e.what());
  }
}

inline PropagatorConfig parse_propagator(const RawConfig& raw, const std::string& prefix) {
  PropagatorConfig c;
  c.scheme = parse_scheme(prefix + ".scheme", raw.at(prefix + ".scheme"));
  const auto modes = to_integer(prefix + ".modes", raw.at(prefix + ".modes"));
  if (modes < 2 || modes % 2 != 0 || modes > 512) throw ConfigError({prefix + ".modes"}, "must be even and in [2, 512]");
  if (c.scheme == Scheme::Pic && !is_power_of_two(static_cast<std::size_t>(modes))) {
    throw ConfigError({prefix + ".modes"}, "PIC grid size must be a power of two");
  }
  c.modes = static_cast<int>(modes);
  const auto m = to_integer(prefix + ".spline_order", raw.at(prefix + ".spline_order"));
  if (m < 1 || m > 15) throw ConfigError({prefix + ".spline_order"}, "must lie in [1, 15]");
  c.spline_order = static_cast<int>(m);
  c.dt = to_double(prefix + ".dt", raw.at(prefix + ".dt"));
  if (!(c.dt > 0.0)) throw ConfigError({prefix + ".dt"}, "must be positive");
  c.nufft_tolerance = to_double(prefix + ".tolerance", raw.at(prefix + ".tolerance"));
  if (c.scheme == Scheme::PifNufft && !(c.nufft_tolerance > 1e-15 && c.nufft_tolerance < 1e-1)) {
    throw ConfigError({prefix + ".tolerance"}, "NUFFT tolerance must lie in (1e-15, 1e-1)");
  }
  return c;
}

inline CoarseVariant parse_variant(const std::string& text) {
  const auto colon = text.find(':');
  CoarseVariant v;
  v.scheme = parse_scheme("heatmap.coarse", text.substr(0, colon));
  if (v.scheme == Scheme::PifNufft) {
    if (colon == std::string::npos) throw ConfigError({"heatmap.coarse"}, "pif_nufft variant needs ':<tolerance>'");
    v.tolerance = to_double("heatmap.coarse", text.substr(colon + 1));
    if (!(v.tolerance > 1e-15 && v.tolerance < 1e-1)) throw ConfigError({"heatmap.coarse"}, "tolerance out of range");
  } else if (colon != std::string::npos) {
    throw ConfigError({"heatmap.coarse"}, "only pif_nufft variants take a tolerance");
  }
  return v;
}

/// Throws when `step` does not divide the subdomain length.
inline void require_divides(double step, const TimePartition& p, const std::vector<std::string>& keys,
                            const std::string& what) {
  if (!TimePartition::divides(step, p.slab())) {
    throw ConfigError(keys, what + " " + format_double(step) + " does not divide the subdomain length " +
                                format_double(p.slab()));
  }
}

}  // namespace detail

/// Fills defaults, rejects unknown keys and resolves every value.
inline RunConfig resolve(const RawConfig& given) {
  RunConfig c;
  for (const auto& [k, v] : given) {
    if (!is_known_key(k)) throw ConfigError({k}, "unknown configuration key");
  }
  for (const auto& spec : schema()) {
    auto it = given.find(spec.key);
    c.raw[spec.key] = it != given.end() ? detail::trim(it->second) : spec.fallback;
  }
  const RawConfig& r = c.raw;
  using detail::to_double;
  using detail::to_integer;

  const std::string mode = r.at("run.mode");
  if (mode == "serial") c.mode = Mode::Serial;
  else if (mode == "parareal") c.mode = Mode::Parareal;
  else if (mode == "conservation") c.mode = Mode::Conservation;
  else if (mode == "sweep") c.mode = Mode::Sweep;
  else if (mode == "heatmap") c.mode = Mode::Heatmap;
  else throw ConfigError({"run.mode"}, "unknown mode '" + mode + "'");

  try {
    const auto kind = scenario_kind_from_string(r.at("run.scenario"));
    c.scenario = kind == ScenarioKind::LandauDamping ? Scenario::landau()
                 : kind == ScenarioKind::TwoStream   ? Scenario::two_stream()
                                                     : Scenario::penning();
  } catch (const ArgumentError& e) {
    throw ConfigError({"run.scenario"}, e.what());
  }
  {
    const std::string seed = r.at("run.seed");
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), s);
    if (ec != std::errc() || ptr != seed.data() + seed.size()) throw ConfigError({"run.seed"}, "expected an unsigned integer");
    c.scenario.seed = s;
  }
  if (!r.at("scenario.alpha").empty()) c.scenario.alpha = to_double("scenario.alpha", r.at("scenario.alpha"));
  if (!r.at("scenario.sigma").empty()) c.scenario.sigma = to_double("scenario.sigma", r.at("scenario.sigma"));
  if (!r.at("scenario.wavenumber").empty()) {
    if (c.scenario.kind == ScenarioKind::PenningTrap) throw ConfigError({"scenario.wavenumber"}, "not used by penning");
    c.scenario.wavenumber = to_double("scenario.wavenumber", r.at("scenario.wavenumber"));
    if (!(c.scenario.wavenumber > 0.0)) throw ConfigError({"scenario.wavenumber"}, "must be positive");
    c.scenario.length = 2.0 * std::numbers::pi / c.scenario.wavenumber;
    c.scenario.total_charge = -std::pow(c.scenario.length, 3);
  }
  try {
    c.scenario.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigError({"scenario.alpha", "scenario.sigma", "scenario.wavenumber"}, e.what());
  }

  c.particles_per_cell = to_double("run.particles_per_cell", r.at("run.particles_per_cell"));
  if (!(c.particles_per_cell > 0.0)) throw ConfigError({"run.particles_per_cell"}, "must be positive");
  const auto np = to_integer("run.particles", r.at("run.particles"));
  if (np < 0) throw ConfigError({"run.particles"}, "must be nonnegative");
  c.particles = static_cast<std::size_t>(np);
  c.t_start = to_double("run.t_start", r.at("run.t_start"));
  c.t_end = to_double("run.t_end", r.at("run.t_end"));
  if (!(c.t_end > c.t_start)) throw ConfigError({"run.t_start", "run.t_end"}, "end time must exceed start time");
  c.output_dir = r.at("run.output_dir");

  c.fine = detail::parse_propagator(r, "fine");
  c.coarse = detail::parse_propagator(r, "coarse");
  c.fine.external = c.scenario.external_fields();
  c.coarse.external = c.scenario.external_fields();

  const auto nsub = to_integer("parareal.subdomains", r.at("parareal.subdomains"));
  if (nsub < 1 || nsub > 4096) throw ConfigError({"parareal.subdomains"}, "must lie in [1, 4096]");
  c.subdomains = static_cast<int>(nsub);
  c.parareal.tolerance = to_double("parareal.tolerance", r.at("parareal.tolerance"));
  if (!(c.parareal.tolerance >= 0.0)) throw ConfigError({"parareal.tolerance"}, "must be nonnegative");
  const auto blocks = to_integer("parareal.blocks", r.at("parareal.blocks"));
  if (blocks < 1 || nsub % blocks != 0) throw ConfigError({"parareal.blocks", "parareal.subdomains"}, "blocks must divide subdomains");
  c.parareal.blocks = static_cast<int>(blocks);
  const auto maxit = to_integer("parareal.max_iterations", r.at("parareal.max_iterations"));
  if (maxit < 0) throw ConfigError({"parareal.max_iterations"}, "must be nonnegative");
  c.parareal.max_iterations = static_cast<int>(maxit);
  try {
    c.parareal.executor = executor_from_string(r.at("parareal.executor"));
  } catch (const ArgumentError& e) {
    throw ConfigError({"parareal.executor"}, e.what());
  }
  c.parareal.record_trace = detail::to_bool("output.trace", r.at("output.trace"));
  c.parareal.record_conservation = detail::to_bool("output.conservation", r.at("output.conservation"));
  c.final_state = detail::to_bool("output.final_state", r.at("output.final_state"));

  // Cross-field rules.
  const TimePartition p = c.partition();
  const std::vector<std::string> span_keys = {"parareal.subdomains", "run.t_start", "run.t_end"};
  auto with = [&](const std::string& k) {
    auto v = span_keys;
    v.insert(v.begin(), k);
    return v;
  };
  if (c.mode == Mode::Serial) {
    if (!TimePartition::divides(c.fine.dt, c.t_end - c.t_start)) {
      throw ConfigError({"fine.dt", "run.t_start", "run.t_end"}, "fine.dt does not divide the run length");
    }
  } else {
    detail::require_divides(c.fine.dt, p, with("fine.dt"), "fine.dt");
    if (c.mode != Mode::Heatmap) {
      detail::require_divides(c.coarse.dt, p, with("coarse.dt"), "coarse.dt");
      if (c.coarse.dt < c.fine.dt) throw ConfigError({"coarse.dt", "fine.dt"}, "coarse step must not be smaller than the fine step");
    }
    if (c.coarse.scheme == Scheme::PifNufft && c.fine.scheme == Scheme::PifNufft &&
        c.coarse.nufft_tolerance < c.fine.nufft_tolerance && c.mode != Mode::Heatmap) {
      throw ConfigError({"coarse.tolerance", "fine.tolerance"}, "coarse tolerance must not be tighter than the fine tolerance");
    }
  }

  if (c.mode == Mode::Sweep) {
    const std::string axis = r.at("sweep.axis");
    if (axis == "pc") c.sweep_axis = SweepAxis::Pc;
    else if (axis == "h") c.sweep_axis = SweepAxis::H;
    else if (axis == "dt_g") c.sweep_axis = SweepAxis::DtG;
    else if (axis == "epsilon") c.sweep_axis = SweepAxis::Epsilon;
    else throw ConfigError({"sweep.axis"}, "unknown sweep axis '" + axis + "'");
    for (const auto& v : detail::split_list(r.at("sweep.values"))) c.sweep_values.push_back(to_double("sweep.values", v));
    if (c.sweep_values.empty()) throw ConfigError({"sweep.values"}, "sweep needs at least one value");
    for (double v : c.sweep_values) {
      if (!(v > 0.0)) throw ConfigError({"sweep.values"}, "sweep values must be positive");
      switch (c.sweep_axis) {
        case SweepAxis::Pc: break;
        case SweepAxis::H: {
          const double n = std::nearbyint(v);
          if (n != v || static_cast<long>(n) % 2 != 0) throw ConfigError({"sweep.values"}, "h sweep values are mode counts (even integers)");
          if ((c.fine.scheme == Scheme::Pic || c.coarse.scheme == Scheme::Pic) && !is_power_of_two(static_cast<std::size_t>(n))) {
            throw ConfigError({"sweep.values"}, "PIC grid sizes must be powers of two");
          }
          break;
        }
        case SweepAxis::DtG:
          detail::require_divides(v, p, with("sweep.values"), "sweep value");
          if (v < c.fine.dt) throw ConfigError({"sweep.values", "fine.dt"}, "coarse step must not be smaller than the fine step");
          break;
        case SweepAxis::Epsilon:
          if (c.coarse.scheme != Scheme::PifNufft) throw ConfigError({"sweep.axis", "coarse.scheme"}, "epsilon sweep needs coarse.scheme = pif_nufft");
          if (!(v > 1e-15 && v < 1e-1)) throw ConfigError({"sweep.values"}, "NUFFT tolerance must lie in (1e-15, 1e-1)");
          break;
      }
    }
    // Methodology: isolate one error component at a time.
    if (c.sweep_axis != SweepAxis::DtG && c.coarse.dt != c.fine.dt) {
      c.warnings.push_back("coarse.dt differs from fine.dt during a " + axis + " sweep; the time error is not isolated");
    }
    if (c.sweep_axis == SweepAxis::DtG && c.coarse.scheme != Scheme::Pic && c.fine.scheme == Scheme::PifNufft &&
        c.coarse.nufft_tolerance != c.fine.nufft_tolerance) {
      c.warnings.push_back("coarse.tolerance differs from fine.tolerance during a dt_g sweep; the NUFFT error is not isolated");
    }
  }

  if (c.mode == Mode::Heatmap) {
    for (const auto& v : detail::split_list(r.at("heatmap.coarse"))) c.heatmap_coarse.push_back(detail::parse_variant(v));
    for (const auto& v : detail::split_list(r.at("heatmap.ratios"))) {
      const auto ratio = to_integer("heatmap.ratios", v);
      if (ratio < 1) throw ConfigError({"heatmap.ratios"}, "ratios must be positive integers");
      detail::require_divides(static_cast<double>(ratio) * c.fine.dt, p, with("heatmap.ratios"), "coarse step");
      c.heatmap_ratios.push_back(static_cast<int>(ratio));
    }
    if (c.heatmap_coarse.empty() || c.heatmap_ratios.empty()) throw ConfigError({"heatmap.coarse", "heatmap.ratios"}, "heatmap needs variants and ratios");
    if (c.coarse.scheme == Scheme::Pic && !is_power_of_two(static_cast<std::size_t>(c.coarse.modes))) {
      throw ConfigError({"coarse.modes"}, "PIC grid size must be a power of two");
    }
  }
  return c;
}

//---------------------------------------------------------------------------//
// Drivers
//---------------------------------------------------------------------------//

struct SerialResult {
  std::vector<TraceRow> trace;
  PhaseSpaceState final_state;
  double wall_seconds = 0.0;
};

/// Serial run of one propagator over [t0, t1], recording every step.
inline SerialResult run_serial(const PhaseSpaceState& u0, const Propagator& prop, double t0, double t1, int label = 0) {
  SerialResult out;
  const auto start = parapif::detail::Clock::now();
  out.final_state = prop.propagate(u0, t0, t1, [&](std::size_t, double t, const PhaseSpaceState& s, const FieldSolution& f) {
    out.trace.push_back({label, t, conserved_quantities(s, f)});
  });
  out.wall_seconds = parapif::detail::seconds_since(start);
  return out;
}

inline PhaseSpaceState initial_state(const RunConfig& c, int fine_modes) {
  return sample(c.scenario, c.particle_count(fine_modes));
}

/// L-infinity over subdomains of the stopping quantity, per iteration
/// (index k-1). Only iterations every block reached are reported.
inline std::vector<PhaseSpaceError> max_error_per_iteration(const ParaealRunReport& r) {
  int kmax = 0;
  for (const auto& e : r.errors) kmax = std::max(kmax, e.iteration);
  std::vector<PhaseSpaceError> out(static_cast<std::size_t>(kmax));
  for (const auto& e : r.errors) {
    auto& m = out[static_cast<std::size_t>(e.iteration - 1)];
    m.x = std::max(m.x, e.err_x);
    m.v = std::max(m.v, e.err_v);
  }
  return out;
}

struct SlopeRow {
  int iteration = 0;
  std::optional<double> slope_x;
  std::optional<double> slope_v;
  int n_points = 0;
  std::string note;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::Pc;
  std::vector<double> values;
  std::vector<double> abscissa;  // value mapped to the fitted variable (P_c, h, dt_g, epsilon)
  std::vector<ParaealRunReport> runs;
  std::vector<SlopeRow> slopes;
};

/// Configuration for one sweep point.
inline RunConfig sweep_point(const RunConfig& base, double value) {
  RunConfig c = base;
  switch (base.sweep_axis) {
    case SweepAxis::Pc: c.particles_per_cell = value; c.particles = 0; break;
    case SweepAxis::H: c.fine.modes = c.coarse.modes = static_cast<int>(std::nearbyint(value)); break;
    case SweepAxis::DtG: c.coarse.dt = value; break;
    case SweepAxis::Epsilon: c.coarse.nufft_tolerance = value; break;
  }
  return c;
}

inline std::vector<SlopeRow> fit_slopes(const std::vector<double>& xs, const std::vector<ParaealRunReport>& runs) {
  std::size_t kmax = 0;
  std::vector<std::vector<PhaseSpaceError>> per_run;
  for (const auto& r : runs) {
    per_run.push_back(max_error_per_iteration(r));
    kmax = std::max(kmax, per_run.back().size());
  }
  std::vector<SlopeRow> out;
  for (std::size_t k = 0; k < kmax; ++k) {
    SlopeRow row;
    row.iteration = static_cast<int>(k) + 1;
    std::vector<double> px, ex, pv, ev;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (k >= per_run[i].size()) continue;
      if (per_run[i][k].x > 0.0) {
        px.push_back(xs[i]);
        ex.push_back(per_run[i][k].x);
      }
      if (per_run[i][k].v > 0.0) {
        pv.push_back(xs[i]);
        ev.push_back(per_run[i][k].v);
      }
    }
    row.n_points = static_cast<int>(std::min(px.size(), pv.size()));
    if (px.size() >= 3) row.slope_x = fit_power_law(px, ex);
    if (pv.size() >= 3) row.slope_v = fit_power_law(pv, ev);
    if (!row.slope_x || !row.slope_v) row.note = "fewer than 3 positive points";
    out.push_back(row);
  }
  return out;
}

inline SweepReport run_sweep(const RunConfig& base) {
  SweepReport rep;
  rep.axis = base.sweep_axis;
  rep.values = base.sweep_values;
  for (double v : base.sweep_values) {
    const RunConfig c = sweep_point(base, v);
    const Domain dom = c.scenario.domain();
    const Propagator fine(c.fine, dom), coarse(c.coarse, dom);
    PararealOptions o = c.parareal;
    o.record_trace = false;
    o.record_conservation = false;
    rep.runs.push_back(run_parareal(initial_state(c, c.fine.modes), fine, coarse, c.partition(), o));
    rep.abscissa.push_back(base.sweep_axis == SweepAxis::H ? dom.length / v : v);
  }
  rep.slopes = fit_slopes(rep.abscissa, rep.runs);
  return rep;
}

struct HeatmapCell {
  CoarseVariant coarse;
  int ratio = 1;
  int iterations = 0;
  std::size_t fine_solves = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

inline std::vector<HeatmapCell> run_heatmap(const RunConfig& base) {
  std::vector<HeatmapCell> cells;
  const Domain dom = base.scenario.domain();
  const PhaseSpaceState u0 = initial_state(base, base.fine.modes);
  const Propagator fine(base.fine, dom);
  for (const auto& variant : base.heatmap_coarse) {
    for (int ratio : base.heatmap_ratios) {
      PropagatorConfig cc = base.coarse;
      cc.scheme = variant.scheme;
      if (variant.scheme == Scheme::PifNufft) cc.nufft_tolerance = variant.tolerance;
      cc.dt = ratio * base.fine.dt;
      const Propagator coarse(cc, dom);
      TimePartition p = base.partition();
      p.dt_coarse = cc.dt;
      PararealOptions o = base.parareal;
      o.record_trace = false;
      o.record_conservation = false;
      const auto start = parapif::detail::Clock::now();
      const auto r = run_parareal(u0, fine, coarse, p, o);
      cells.push_back({variant, ratio, r.total_iterations(), r.fine_solves, r.converged(),
                       parapif::detail::seconds_since(start)});
    }
  }
  return cells;
}

//---------------------------------------------------------------------------//
// CSV output
//---------------------------------------------------------------------------//

namespace csv {

inline std::string num(double v) { return detail::format_double(v); }

inline void errors_header(std::ostream& o, bool sweep) {
  o << (sweep ? "sweep_value," : "") << "block,subdomain,iteration,err_x,err_v\n";
}

inline void errors_rows(std::ostream& o, const ParaealRunReport& r, std::optional<double> sweep_value = std::nullopt) {
  for (const auto& e : r.errors) {
    if (sweep_value) o << num(*sweep_value) << ',';
    o << e.block << ',' << e.subdomain << ',' << e.iteration << ',' << num(e.err_x) << ',' << num(e.err_v) << '\n';
  }
}

inline void conservation_header(std::ostream& o) { o << "iteration,time,energy,momentum_x,momentum_y,momentum_z,charge_err\n"; }

inline void conservation_row(std::ostream& o, int iteration, double time, const ConservedQuantities& q) {
  o << iteration << ',' << num(time) << ',' << num(q.total_energy) << ',' << num(q.momentum.x) << ','
    << num(q.momentum.y) << ',' << num(q.momentum.z) << ',' << num(q.charge_k0_error) << '\n';
}

inline void trace_header(std::ostream& o) { o << "iteration,time,field_energy_z,field_energy,kinetic,total\n"; }

inline void trace_row(std::ostream& o, const TraceRow& t) {
  o << t.iteration << ',' << num(t.time) << ',' << num(t.q.field_energy_z) << ',' << num(t.q.field_energy) << ','
    << num(t.q.kinetic) << ',' << num(t.q.total_energy) << '\n';
}

inline void timings_header(std::ostream& o, bool sweep) {
  o << (sweep ? "sweep_value," : "") << "block,iteration,phase,seconds\n";
}

inline void timings_rows(std::ostream& o, const ParaealRunReport& r, std::optional<double> sweep_value = std::nullopt) {
  for (const auto& t : r.timings) {
    if (sweep_value) o << num(*sweep_value) << ',';
    o << t.block << ',' << t.iteration << ',' << t.phase << ',' << num(t.seconds) << '\n';
  }
}

inline void slopes(std::ostream& o, const std::vector<SlopeRow>& rows) {
  o << "iteration,slope_x,slope_v,n_points,note\n";
  for (const auto& s : rows) {
    o << s.iteration << ',' << (s.slope_x ? num(*s.slope_x) : "") << ',' << (s.slope_v ? num(*s.slope_v) : "") << ','
      << s.n_points << ',' << s.note << '\n';
  }
}

inline void heatmap(std::ostream& o, const std::vector<HeatmapCell>& cells) {
  o << "coarse_scheme,epsilon_g,ratio,iterations,fine_solves,converged,wall_seconds\n";
  for (const auto& c : cells) {
    o << to_string(c.coarse.scheme) << ',' << (c.coarse.scheme == Scheme::PifNufft ? num(c.coarse.tolerance) : "") << ','
      << c.ratio << ',' << c.iterations << ',' << c.fine_solves << ',' << (c.converged ? 1 : 0) << ','
      << num(c.wall_seconds) << '\n';
  }
}

}  // namespace csv

/// Resolved configuration as INI text; feeding it back reproduces the run.
inline void write_manifest(std::ostream& o, const RunConfig& c) {
  std::string section;
  for (const auto& spec : schema()) {
    const std::string key = spec.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      o << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    o << key.substr(dot + 1) << " = " << c.raw.at(key) << '\n';
  }
  o << "\n[manifest]\n";
  o << "version = " << PARAPIF_VERSION << '\n';
  o << "seed = " << c.scenario.seed << '\n';
  o << "particles = " << c.particle_count(c.fine.modes) << '\n';
  for (std::size_t i = 0; i < c.warnings.size(); ++i) o << "warning" << i << " = " << c.warnings[i] << '\n';
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream f(dir / name);
  if (!f) throw Error("cannot write " + (dir / name).string());
  return f;
}

}  // namespace detail

/// Executes a resolved configuration, writing all outputs into `dir`.
inline void execute(const RunConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto m = detail::open_output(dir, "manifest.ini");
    write_manifest(m, c);
  }
  auto errors = detail::open_output(dir, "errors.csv");
  auto conservation = detail::open_output(dir, "conservation.csv");
  auto trace = detail::open_output(dir, "energy_trace.csv");
  auto timings = detail::open_output(dir, "timings.csv");
  const bool sweep = c.mode == Mode::Sweep;
  csv::errors_header(errors, sweep);
  csv::conservation_header(conservation);
  csv::trace_header(trace);
  csv::timings_header(timings, sweep);
  const Domain dom = c.scenario.domain();
  std::optional<PhaseSpaceState> final_state;

  switch (c.mode) {
    case Mode::Serial: {
      const Propagator fine(c.fine, dom);
      auto r = run_serial(initial_state(c, c.fine.modes), fine, c.t_start, c.t_end, 0);
      for (const auto& row : r.trace) {
        csv::trace_row(trace, row);
        csv::conservation_row(conservation, 0, row.time, row.q);
      }
      timings << "0,0,serial," << csv::num(r.wall_seconds) << '\n';
      final_state = std::move(r.final_state);
      break;
    }
    case Mode::Parareal:
    case Mode::Conservation: {
      const Propagator fine(c.fine, dom), coarse(c.coarse, dom);
      const PhaseSpaceState u0 = initial_state(c, c.fine.modes);
      PararealOptions o = c.parareal;
      if (c.mode == Mode::Conservation) o.record_trace = true;
      const auto r = run_parareal(u0, fine, coarse, c.partition(), o);
      csv::errors_rows(errors, r);
      csv::timings_rows(timings, r);
      if (c.mode == Mode::Conservation) {
        // Every fine step of every iteration, then the serial fine reference as iteration -1.
        const auto ref = run_serial(u0, fine, c.t_start, c.t_end, -1);
        for (const auto& row : r.trace) csv::conservation_row(conservation, row.iteration, row.time, row.q);
        for (const auto& row : ref.trace) csv::conservation_row(conservation, -1, row.time, row.q);
        for (const auto& row : r.trace) csv::trace_row(trace, row);
        for (const auto& row : ref.trace) csv::trace_row(trace, row);
        timings << "-1,0,serial_reference," << csv::num(ref.wall_seconds) << '\n';
      } else {
        for (const auto& row : r.conservation) csv::conservation_row(conservation, row.iteration, row.time, row.q);
        for (const auto& row : r.trace) csv::trace_row(trace, row);
      }
      final_state = r.final_state;
      break;
    }
    case Mode::Sweep: {
      const auto rep = run_sweep(c);
      for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        csv::errors_rows(errors, rep.runs[i], rep.values[i]);
        csv::timings_rows(timings, rep.runs[i], rep.values[i]);
      }
      auto s = detail::open_output(dir, "slopes.csv");
      csv::slopes(s, rep.slopes);
      break;
    }
    case Mode::Heatmap: {
      const auto cells = run_heatmap(c);
      auto h = detail::open_output(dir, "heatmap.csv");
      csv::heatmap(h, cells);
      break;
    }
  }
  if (c.final_state && final_state) {
    auto f = detail::open_output(dir, "final_state.csv");
    write_state_csv(*final_state, f);
  }
}

/// Exit codes of the command-line front end.
enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3 };

namespace detail {

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? '\'' : ch;
  return out + "\"";
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace detail

/// Resolves and executes, reporting failures as one machine-readable line on
/// `err`: "error category=<schema|numeric|runtime> ...".
inline int run(const RawConfig& raw, const std::optional<std::string>& output_dir, std::ostream& err) {
  try {
    const RunConfig c = resolve(raw);
    for (const auto& w : c.warnings) err << "warning " << w << '\n';
    execute(c, output_dir ? *output_dir : c.output_dir);
    return kOk;
  } catch (const ConfigError& e) {
    err << "error category=schema key=" << detail::join(e.keys()) << " message=" << detail::quoted(e.what()) << '\n';
    return kConfig;
  } catch (const PropagationError& e) {
    err << "error category=" << (e.numeric() ? "numeric" : "runtime") << " module=parareal block=" << e.block()
        << " subdomain=" << e.subdomain() << " message=" << detail::quoted(e.what()) << '\n';
    return e.numeric() ? kNumeric : kFailure;
  } catch (const NumericError& e) {
    err << "error category=numeric module=propagator message=" << detail::quoted(e.what()) << '\n';
    return kNumeric;
  } catch (const ConfigurationError& e) {
    err << "error category=schema key= message=" << detail::quoted(e.what()) << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error category=runtime message=" << detail::quoted(e.what()) << '\n';
    return kFailure;
  }
}

}  // namespace parapif::harness
