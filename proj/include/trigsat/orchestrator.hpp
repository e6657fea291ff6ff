#pragma once

// Runs K solver threads plus (optionally) one exchange engine worker on the
// same formula and returns the first answer, after validating it.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "trigsat/core.hpp"
#include "trigsat/engine.hpp"
#include "trigsat/instrumentation.hpp"
#include "trigsat/solver.hpp"

namespace trigsat {

struct RunConfig {
  std::size_t threads = 1;
  bool use_engine = true;
  EngineConfig engine;
  SolverConfig solver;
  // Applied to each thread's solver config after the default diversification.
  std::function<void(std::size_t thread, SolverConfig&)> customize;
  std::optional<std::chrono::duration<double>> time_limit;
  std::uint64_t seed = 0;
  bool record_intervals = false;
  bool keep_raw_intervals = false;
  bool record_subsets = false;
  std::function<void(const RoundTrace&)> round_observer;

  void validate() const {
    if (threads < 1) throw std::invalid_argument("RunConfig: threads must be >= 1");
    if (time_limit && time_limit->count() <= 0) throw std::invalid_argument("RunConfig: time limit must be positive");
    if (use_engine) engine.validate();
  }
};

enum class FinalStatus { Sat, Unsat, Unknown, InternalError };

constexpr std::string_view to_string(FinalStatus s) noexcept {
  switch (s) {
    case FinalStatus::Sat: return "SATISFIABLE";
    case FinalStatus::Unsat: return "UNSATISFIABLE";
    case FinalStatus::Unknown: return "UNKNOWN";
    case FinalStatus::InternalError: return "INTERNAL_ERROR";
  }
  return "?";
}

struct RunStatistics {
  std::vector<SolverStats> threads;
  std::optional<EngineStats> engine;
  std::optional<ClauseUseRecorder> intervals;
  std::optional<ValueSubsetRecorder> subsets;
  double seconds = 0.0;

  SolverStats total() const {
    SolverStats t;
    for (const auto& s : threads) {
      t.conflicts += s.conflicts;
      t.decisions += s.decisions;
      t.propagations += s.propagations;
      t.restarts += s.restarts;
      t.reduces += s.reduces;
      t.learned += s.learned;
      t.learned_units += s.learned_units;
      t.removed += s.removed;
      t.exported += s.exported;
      t.snapshots_sent += s.snapshots_sent;
      t.snapshots_refused += s.snapshots_refused;
      t.snapshots_suppressed += s.snapshots_suppressed;
      t.reports_received += s.reports_received;
      for (std::size_t i = 0; i < t.imports.size(); ++i) t.imports[i] += s.imports[i];
    }
    return t;
  }
};

struct FinalAnswer {
  FinalStatus status = FinalStatus::Unknown;
  Assignment model;
  std::optional<std::size_t> winner;
  RunStatistics stats;
  std::string error;
};

// Per-thread portfolio diversification: distinct seeds, alternating initial
// phases and a little random branching on every thread but the first.
inline SolverConfig diversified(const SolverConfig& base, std::size_t thread, std::uint64_t seed) {
  SolverConfig c = base;
  c.seed = base.seed + seed * 1000003 + thread;
  if (thread % 2 == 1) c.initial_phase_negative = !base.initial_phase_negative;
  if (thread > 0 && c.random_var_freq == 0.0) c.random_var_freq = 0.005 * static_cast<double>(1 + thread % 4);
  return c;
}

inline FinalAnswer solve_parallel(const Formula& formula, const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::atomic<bool> stop{false};

  std::unique_ptr<Engine> engine;
  if (cfg.use_engine) {
    engine = std::make_unique<Engine>(cfg.threads, cfg.engine);
    if (cfg.round_observer) engine->set_round_observer(cfg.round_observer);
  }

  std::vector<std::unique_ptr<Solver>> solvers;
  std::vector<ClauseUseRecorder> interval_recorders;
  std::vector<ValueSubsetRecorder> subset_recorders;
  interval_recorders.reserve(cfg.threads);
  subset_recorders.reserve(cfg.threads);
  for (std::size_t t = 0; t < cfg.threads; ++t) {
    SolverConfig sc = diversified(cfg.solver, t, cfg.seed);
    if (cfg.customize) cfg.customize(t, sc);
    solvers.push_back(std::make_unique<Solver>(formula, t, sc, engine.get(), &stop));
    interval_recorders.emplace_back(cfg.keep_raw_intervals);
    subset_recorders.emplace_back(formula.num_vars);
    solvers.back()->set_recorders(cfg.record_intervals ? &interval_recorders.back() : nullptr,
                                  cfg.record_subsets ? &subset_recorders.back() : nullptr);
  }

  std::mutex mutex;
  std::condition_variable finished;
  std::size_t running = cfg.threads;
  std::optional<std::size_t> winner;
  std::vector<SolveStatus> results(cfg.threads, SolveStatus::Interrupted);

  std::jthread engine_worker;
  if (engine) engine_worker = std::jthread([&](std::stop_token st) { engine->run_worker(st); });

  std::vector<std::jthread> workers;
  for (std::size_t t = 0; t < cfg.threads; ++t) {
    workers.emplace_back([&, t] {
      const SolveStatus r = solvers[t]->solve();
      std::lock_guard lock(mutex);
      results[t] = r;
      if (r != SolveStatus::Interrupted && !winner) {
        winner = t;
        stop.store(true);
      }
      --running;
      finished.notify_all();
    });
  }

  {
    std::unique_lock lock(mutex);
    auto done = [&] { return winner.has_value() || running == 0; };
    if (cfg.time_limit) {
      const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(*cfg.time_limit);
      finished.wait_until(lock, deadline, done);
    } else {
      finished.wait(lock, done);
    }
  }
  stop.store(true);
  for (auto& w : workers) w.join();
  if (engine_worker.joinable()) {
    engine_worker.request_stop();
    engine_worker.join();
  }

  FinalAnswer answer;
  answer.winner = winner;
  bool any_sat = false, any_unsat = false;
  for (auto r : results) {
    any_sat |= r == SolveStatus::Sat;
    any_unsat |= r == SolveStatus::Unsat;
  }
  if (any_sat && any_unsat) {
    answer.status = FinalStatus::InternalError;
    answer.error = "threads disagree on satisfiability";
  } else if (winner) {
    if (results[*winner] == SolveStatus::Sat) {
      answer.model = solvers[*winner]->model();
      if (verify_model(formula, answer.model)) {
        answer.status = FinalStatus::Sat;
      } else {
        answer.status = FinalStatus::InternalError;
        answer.error = "model of thread " + std::to_string(*winner) + " violates the formula";
      }
    } else {
      answer.status = FinalStatus::Unsat;
    }
  }

  for (const auto& s : solvers) answer.stats.threads.push_back(s->stats());
  if (engine) answer.stats.engine = stats_summary(engine->counters());
  if (cfg.record_intervals) {
    ClauseUseRecorder merged(cfg.keep_raw_intervals);
    for (const auto& r : interval_recorders) merged.merge(r);
    answer.stats.intervals = std::move(merged);
  }
  if (cfg.record_subsets) {
    ValueSubsetRecorder merged(formula.num_vars);
    for (const auto& r : subset_recorders) merged.merge(r);
    answer.stats.subsets = std::move(merged);
  }
  answer.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return answer;
}

}  // namespace trigsat
