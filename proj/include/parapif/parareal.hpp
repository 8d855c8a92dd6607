// Copyright 2026 The parapif Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parareal over a uniform partition of [T_start, T_end]:
//
//   U_0^k      = u0
//   U_{n+1}^0  = G(U_n^0)
//   U_{n+1}^k  = F(U_n^{k-1}) + G(U_n^k) - G(U_n^{k-1})
//
// applied to positions and velocities. The G difference for positions is a
// minimum-image displacement and the corrected position is re-wrapped.
//
// Subdomain n stops once
//   |G(U_n^k) - G(U_n^{k-1})| / |G(U_n^k)| <= tol   (x and v separately)
// and subdomain n-1 has stopped. Two executors are provided: a pipeline with
// one thread per subdomain and SPSC channels between neighbours, and a
// sequential loop. Both perform identical arithmetic, so results agree
// bitwise.

#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "parapif/core.hpp"
#include "parapif/diagnostics.hpp"
#include "parapif/propagator.hpp"

namespace parapif {

/// A failure inside a parareal run, tagged with where it happened.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, int block, int subdomain, bool numeric)
      : Error(what), block_(block), subdomain_(subdomain), numeric_(numeric) {}
  int block() const { return block_; }
  int subdomain() const { return subdomain_; }
  bool numeric() const { return numeric_; }

 private:
  int block_;
  int subdomain_;
  bool numeric_;
};

struct TimePartition {
  double t_start = 0.0;
  double t_end = 1.0;
  int subdomains = 1;
  double dt_fine = 0.05;
  double dt_coarse = 0.05;

  double slab() const { return (t_end - t_start) / subdomains; }
  double boundary(int n) const { return n == subdomains ? t_end : t_start + n * slab(); }

  static bool divides(double step, double span) {
    const double r = span / step;
    return std::nearbyint(r) >= 1.0 && std::abs(std::nearbyint(r) * step - span) <= 1e-9 * span;
  }

  void validate() const {
    if (subdomains < 1) throw ConfigurationError("need at least one time subdomain");
    if (!(t_end > t_start)) throw ConfigurationError("end time must exceed start time");
    if (!(dt_fine > 0.0) || !(dt_coarse > 0.0)) throw ConfigurationError("time steps must be positive");
    if (dt_coarse < dt_fine * (1.0 - 1e-12)) throw ConfigurationError("coarse step must not be smaller than the fine step");
    if (!divides(dt_fine, slab())) throw ConfigurationError("fine step does not divide the subdomain length");
    if (!divides(dt_coarse, slab())) throw ConfigurationError("coarse step does not divide the subdomain length");
  }

  /// Partition of window b out of `blocks` equal windows.
  TimePartition window(int b, int blocks) const {
    if (blocks < 1 || subdomains % blocks != 0) throw ConfigurationError("block count must divide the subdomain count");
    const int per = subdomains / blocks;
    TimePartition w = *this;
    w.t_start = boundary(b * per);
    w.t_end = boundary((b + 1) * per);
    w.subdomains = per;
    return w;
  }
};

/// State of parareal after iteration k.
struct ParaealIterate {
  int iteration = 0;
  std::vector<PhaseSpaceState> u;        // U_n^k, n = 0..N
  std::vector<PhaseSpaceState> g;        // G(U_n^k), n = 0..N-1
  std::vector<char> converged;           // per subdomain
  std::vector<PhaseSpaceError> errors;   // stopping quantity of iteration k (zero for k = 0)

  int subdomains() const { return static_cast<int>(g.size()); }
  bool all_converged() const { return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; }); }
};

/// Parareal correction F + (G_new - G_old) with periodic positions.
inline PhaseSpaceState parareal_correct(PhaseSpaceState fine, const PhaseSpaceState& g_new, const PhaseSpaceState& g_old,
                                        double length) {
  for (std::size_t j = 0; j < fine.size(); ++j) {
    fine.x[j] = wrap_periodic(fine.x[j] + minimum_image(g_new.x[j] - g_old.x[j], length), length);
    fine.v[j] += g_new.v[j] - g_old.v[j];
  }
  return fine;
}

inline bool below_tolerance(const PhaseSpaceError& e, double tol) { return e.x <= tol && e.v <= tol; }

/// Per-subdomain stopping test between two successive iterates.
inline std::vector<bool> check_convergence(const ParaealIterate& prev, const ParaealIterate& next, double tol,
                                           double length) {
  if (prev.g.size() != next.g.size()) throw ArgumentError("check_convergence: iterates have different partitions");
  std::vector<bool> out(next.g.size());
  bool chain = true;
  for (std::size_t n = 0; n < next.g.size(); ++n) {
    chain = chain && below_tolerance(relative_error(prev.g[n], next.g[n], length), tol);
    out[n] = chain;
  }
  return out;
}

/// Per-step fine-solve trace row.
struct TraceRow {
  int iteration = 0;
  double time = 0.0;
  ConservedQuantities q;
};

struct ConservationRow {
  int block = 0;
  int iteration = 0;
  double time = 0.0;
  ConservedQuantities q;
};

struct ErrorRow {
  int block = 0;
  int subdomain = 0;  // global subdomain index
  int iteration = 0;
  double err_x = 0.0;
  double err_v = 0.0;
};

struct TimingRow {
  int block = 0;
  int iteration = 0;
  std::string phase;
  double seconds = 0.0;
};

enum class Executor { Auto, Concurrent, Sequential };

inline const char* to_string(Executor e) {
  switch (e) {
    case Executor::Auto: return "auto";
    case Executor::Concurrent: return "concurrent";
    case Executor::Sequential: return "sequential";
  }
  return "unknown";
}

inline Executor executor_from_string(const std::string& s) {
  if (s == "auto") return Executor::Auto;
  if (s == "concurrent") return Executor::Concurrent;
  if (s == "sequential") return Executor::Sequential;
  throw ArgumentError("unknown executor '" + s + "' (expected auto, concurrent or sequential)");
}

/// Thread budget: PARAPIF_THREADS if set, else the hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("PARAPIF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct PararealOptions {
  double tolerance = 1e-11;
  int blocks = 1;
  int max_iterations = 0;  // 0: number of subdomains per block
  Executor executor = Executor::Auto;
  int threads = 0;         // 0: thread_budget()
  bool record_trace = false;
  bool record_conservation = false;
};

struct ParaealRunReport {
  std::vector<ErrorRow> errors;
  std::vector<ConservationRow> conservation;
  std::vector<TraceRow> trace;
  std::vector<TimingRow> timings;
  std::vector<int> iterations;  // per block
  std::vector<char> block_converged;
  std::size_t fine_solves = 0;   // fine subdomain propagations
  std::size_t coarse_solves = 0;
  Executor executor_used = Executor::Sequential;
  double wall_seconds = 0.0;
  PhaseSpaceState final_state;

  bool converged() const {
    return std::all_of(block_converged.begin(), block_converged.end(), [](char c) { return c != 0; });
  }
  int total_iterations() const {
    int s = 0;
    for (int k : iterations) s += k;
    return s;
  }
};

/// Serial coarse sweep: iteration 0.
inline ParaealIterate parareal_start(const PhaseSpaceState& u0, const Propagator& coarse, const TimePartition& p) {
  p.validate();
  ParaealIterate it;
  it.u.reserve(static_cast<std::size_t>(p.subdomains) + 1);
  it.u.push_back(u0);
  for (int n = 0; n < p.subdomains; ++n) {
    it.g.push_back(coarse.propagate(it.u.back(), p.boundary(n), p.boundary(n + 1)));
    it.u.push_back(it.g.back());
  }
  it.converged.assign(static_cast<std::size_t>(p.subdomains), 0);
  it.errors.assign(static_cast<std::size_t>(p.subdomains), PhaseSpaceError{});
  return it;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Everything one subdomain produces in one iteration.
struct SubdomainResult {
  PhaseSpaceState out;    // U_{n+1}^k
  PhaseSpaceState g_new;  // G(U_n^k)
  PhaseSpaceError err;
  bool converged = false;
  std::vector<TraceRow> trace;
  std::optional<ConservedQuantities> conservation;  // of U_{n+1}^k
  double fine_seconds = 0.0;
  double coarse_seconds = 0.0;
};

struct Recording {
  bool trace = false;
  bool conservation = false;
  double origin = 0.0;  // trace keeps step 0 only for a subdomain starting here
};

/// Work of subdomain n in iteration k. `input_changed` is false when the
/// predecessor has stopped, in which case G(U_n^k) = G(U_n^{k-1}) exactly.
inline SubdomainResult subdomain_update(const Propagator& fine, const Propagator& coarse, const TimePartition& p, int n,
                                        int k, const PhaseSpaceState& fine_input, const PhaseSpaceState& input,
                                        bool input_changed, const PhaseSpaceState& g_old, bool predecessor_converged,
                                        double tol, Recording rec) {
  SubdomainResult r;
  const double t0 = p.boundary(n), t1 = p.boundary(n + 1);
  auto start = Clock::now();
  StepObserver observe;
  if (rec.trace) {
    observe = [&](std::size_t step, double t, const PhaseSpaceState& s, const FieldSolution& f) {
      if (step == 0 && t0 > rec.origin) return;
      r.trace.push_back({k, t, conserved_quantities(s, f)});
    };
  }
  PhaseSpaceState f_out = fine.propagate(fine_input, t0, t1, observe);
  r.fine_seconds = seconds_since(start);
  start = Clock::now();
  r.g_new = input_changed ? coarse.propagate(input, t0, t1) : g_old;
  r.coarse_seconds = seconds_since(start);
  const double length = fine.domain().length;
  r.out = parareal_correct(std::move(f_out), r.g_new, g_old, length);
  r.err = relative_error(g_old, r.g_new, length);
  r.converged = predecessor_converged && below_tolerance(r.err, tol);
  if (rec.conservation) r.conservation = conserved_quantities(r.out, fine.solve(r.out));
  return r;
}

template <class F>
auto tagged(int block, int n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PropagationError&) {
    throw;
  } catch (const NumericError& e) {
    throw PropagationError(e.what(), block, n, true);
  } catch (const Error& e) {
    throw PropagationError(e.what(), block, n, false);
  }
}

}  // namespace detail


/// What one iteration produced, per subdomain (empty entries: skipped).
struct IterationLog {
  int iteration = 0;
  std::vector<std::optional<PhaseSpaceError>> errors;
  std::vector<std::optional<ConservedQuantities>> conservation;  // of U_{n+1}
  std::vector<std::vector<TraceRow>> trace;
  double fine_seconds = 0.0;
  double coarse_seconds = 0.0;
  std::size_t fine_solves = 0;
  std::size_t coarse_solves = 0;

  IterationLog(int k, int subdomains)
      : iteration(k),
        errors(static_cast<std::size_t>(subdomains)),
        conservation(static_cast<std::size_t>(subdomains)),
        trace(static_cast<std::size_t>(subdomains)) {}

  void absorb(int n, detail::SubdomainResult& r, bool coarse_ran) {
    const auto un = static_cast<std::size_t>(n);
    errors[un] = r.err;
    conservation[un] = r.conservation;
    trace[un] = std::move(r.trace);
    fine_seconds += r.fine_seconds;
    coarse_seconds += r.coarse_seconds;
    fine_solves += 1;
    coarse_solves += coarse_ran ? 1 : 0;
  }
};

/// One parareal iteration k -> k+1 in place, subdomain by subdomain.
/// Converged subdomains are skipped; the first active subdomain sees an
/// unchanged input.
inline void parareal_iteration(ParaealIterate& it, const Propagator& fine, const Propagator& coarse,
                               const TimePartition& p, double tol, IterationLog* log = nullptr,
                               detail::Recording rec = {}, int block = 0) {
  const int nsub = it.subdomains();
  const int k = it.iteration + 1;
  bool pred_converged = true;
  bool input_changed = false;
  std::optional<PhaseSpaceState> old_input;  // U_n^{k-1} once U_n has been overwritten
  for (int n = 0; n < nsub; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (it.converged[un]) {
      pred_converged = true;
      input_changed = false;
      old_input.reset();
      continue;
    }
    const PhaseSpaceState& fine_input = old_input ? *old_input : it.u[un];
    auto r = detail::tagged(block, n, [&] {
      return detail::subdomain_update(fine, coarse, p, n, k, fine_input, it.u[un], input_changed, it.g[un],
                                      pred_converged, tol, rec);
    });
    if (log) log->absorb(n, r, input_changed);
    old_input = std::move(it.u[un + 1]);
    it.u[un + 1] = std::move(r.out);
    it.g[un] = std::move(r.g_new);
    it.errors[un] = r.err;
    it.converged[un] = r.converged ? 1 : 0;
    pred_converged = r.converged;
    input_changed = true;
  }
  it.iteration = k;
}

/// Value-returning form of parareal_iteration.
inline ParaealIterate next_iterate(ParaealIterate it, const Propagator& fine, const Propagator& coarse,
                                         const TimePartition& p, double tol) {
  parareal_iteration(it, fine, coarse, p, tol, nullptr);
  return it;
}

namespace detail {

/// Single-producer/single-consumer hand-off between neighbouring workers.
template <class T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      closed_ = true;
    }
    cv_.notify_one();
  }

  /// Empty when the channel was closed with nothing pending.
  std::optional<T> receive() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  bool closed_ = false;
};

struct BoundaryMessage {
  PhaseSpaceState state;
  bool converged = false;
};

struct WorkerRecord {
  int iteration;
  SubdomainResult result;
  bool coarse_ran;
};

}  // namespace detail

/// Iterations 1..max_iter of one window with one thread per subdomain and
/// at most `threads` of them computing at a time. `it` enters holding
/// iteration 0 and leaves holding each subdomain's last values.
inline std::vector<IterationLog> run_pipeline(ParaealIterate& it, const Propagator& fine, const Propagator& coarse,
                                              const TimePartition& p, double tol, int max_iter,
                                              detail::Recording rec = {}, int threads = 1, int block = 0) {
  const int nsub = it.subdomains();
  const auto usub = static_cast<std::size_t>(nsub);
  std::vector<detail::Channel<detail::BoundaryMessage>> links(usub);
  std::vector<std::vector<detail::WorkerRecord>> records(usub);
  std::vector<std::exception_ptr> failures(usub);
  std::vector<PhaseSpaceState> inputs(it.u.begin(), it.u.end() - 1);
  std::vector<std::optional<PhaseSpaceState>> outputs(usub);
  std::counting_semaphore<1 << 20> slots(std::max(1, threads));

  auto worker = [&](int n) {
    const auto un = static_cast<std::size_t>(n);
    PhaseSpaceState input = std::move(inputs[un]);  // U_n^{k-1}
    PhaseSpaceState& g_old = it.g[un];
    bool pred_converged = n == 0;
    try {
      for (int k = 1; k <= max_iter; ++k) {
        std::optional<PhaseSpaceState> fine_input;
        bool changed = false;
        if (!pred_converged) {
          auto msg = links[un - 1].receive();
          if (!msg) throw Error("predecessor worker failed");
          fine_input = std::move(input);
          input = std::move(msg->state);
          pred_converged = msg->converged;
          changed = true;
        }
        slots.acquire();
        detail::SubdomainResult r;
        try {
          r = detail::tagged(block, n, [&] {
            return detail::subdomain_update(fine, coarse, p, n, k, fine_input ? *fine_input : input, input, changed,
                                            g_old, pred_converged, tol, rec);
          });
        } catch (...) {
          slots.release();
          throw;
        }
        slots.release();
        g_old = std::move(r.g_new);
        const bool converged = r.converged;
        const bool last = converged || k == max_iter;
        if (n + 1 < nsub) {
          if (last) {
            links[un].send({r.out, converged});
          } else {
            links[un].send({std::move(r.out), converged});
          }
        }
        if (last) outputs[un] = std::move(r.out);
        records[un].push_back({k, std::move(r), changed});
        if (last) break;
      }
    } catch (...) {
      failures[un] = std::current_exception();
    }
    if (n + 1 < nsub) links[un].close();
  };

  std::vector<std::thread> pool;
  pool.reserve(usub);
  for (int n = 0; n < nsub; ++n) pool.emplace_back(worker, n);
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  int last_k = 0;
  for (const auto& r : records) last_k = std::max(last_k, r.empty() ? 0 : r.back().iteration);
  std::vector<IterationLog> logs;
  for (int k = 1; k <= last_k; ++k) logs.emplace_back(k, nsub);
  for (std::size_t n = 0; n < usub; ++n) {
    for (auto& rec_n : records[n]) {
      logs[static_cast<std::size_t>(rec_n.iteration - 1)].absorb(static_cast<int>(n), rec_n.result, rec_n.coarse_ran);
    }
    if (!records[n].empty()) {
      it.errors[n] = records[n].back().result.err;
      it.converged[n] = records[n].back().result.converged ? 1 : 0;
    }
    if (outputs[n]) it.u[n + 1] = std::move(*outputs[n]);
  }
  it.iteration = last_k;
  return logs;
}

/// Runs parareal from u0 over `partition`, window by window.
inline ParaealRunReport run_parareal(const PhaseSpaceState& u0, const Propagator& fine, const Propagator& coarse,
                                     const TimePartition& partition, const PararealOptions& opts = {}) {
  partition.validate();
  if (opts.blocks < 1 || partition.subdomains % opts.blocks != 0) {
    throw ConfigurationError("block count must divide the subdomain count");
  }
  if (!(opts.tolerance >= 0.0)) throw ConfigurationError("stopping tolerance must be nonnegative");
  if (!(fine.domain().length == coarse.domain().length)) throw ConfigurationError("fine and coarse domains differ");
  const auto run_start = detail::Clock::now();
  const int threads = opts.threads > 0 ? opts.threads : thread_budget();
  Executor exec = opts.executor;
  if (exec == Executor::Auto) exec = threads > 1 ? Executor::Concurrent : Executor::Sequential;

  ParaealRunReport report;
  report.executor_used = exec;
  const detail::Recording rec{opts.record_trace, opts.record_conservation, partition.t_start};
  PhaseSpaceState state = u0;
  for (int b = 0; b < opts.blocks; ++b) {
    const TimePartition wp = partition.window(b, opts.blocks);
    const int nsub = wp.subdomains;
    const int offset = b * nsub;
    const int max_iter = opts.max_iterations > 0 ? std::min(opts.max_iterations, nsub) : nsub;
    const auto block_start = detail::Clock::now();

    ParaealIterate it = detail::tagged(b, 0, [&] { return parareal_start(state, coarse, wp); });
    report.coarse_solves += static_cast<std::size_t>(nsub);
    report.timings.push_back({b, 0, "coarse_sweep", detail::seconds_since(block_start)});
    if (opts.record_conservation) {
      for (int n = b == 0 ? 0 : 1; n <= nsub; ++n) {
        const auto& s = it.u[static_cast<std::size_t>(n)];
        report.conservation.push_back({b, 0, wp.boundary(n), conserved_quantities(s, fine.solve(s))});
      }
    }

    std::vector<IterationLog> logs;
    if (exec == Executor::Concurrent) {
      logs = run_pipeline(it, fine, coarse, wp, opts.tolerance, max_iter, rec, threads, b);
    } else {
      while (it.iteration < max_iter && !it.all_converged()) {
        logs.emplace_back(it.iteration + 1, nsub);
        parareal_iteration(it, fine, coarse, wp, opts.tolerance, &logs.back(), rec, b);
      }
    }

    for (auto& lg : logs) {
      for (int n = 0; n < nsub; ++n) {
        const auto un = static_cast<std::size_t>(n);
        if (lg.errors[un]) report.errors.push_back({b, offset + n, lg.iteration, lg.errors[un]->x, lg.errors[un]->v});
        if (lg.conservation[un]) report.conservation.push_back({b, lg.iteration, wp.boundary(n + 1), *lg.conservation[un]});
        for (auto& row : lg.trace[un]) report.trace.push_back(row);
      }
      report.fine_solves += lg.fine_solves;
      report.coarse_solves += lg.coarse_solves;
      report.timings.push_back({b, lg.iteration, "fine", lg.fine_seconds});
      report.timings.push_back({b, lg.iteration, "coarse", lg.coarse_seconds});
    }
    report.timings.push_back({b, it.iteration, "block", detail::seconds_since(block_start)});
    report.iterations.push_back(it.iteration);
    report.block_converged.push_back(it.all_converged() ? 1 : 0);
    state = std::move(it.u.back());
  }
  report.final_state = std::move(state);
  report.wall_seconds = detail::seconds_since(run_start);
  report.timings.push_back({-1, 0, "total", report.wall_seconds});
  return report;
}

}  // namespace parapif
