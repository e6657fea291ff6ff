#pragma once

// Command-line front end. Output follows SAT competition conventions:
// "s SATISFIABLE" plus "v" model lines (exit 10), "s UNSATISFIABLE"
// (exit 20), "s UNKNOWN" (exit 0). Usage and input errors exit 1.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trigsat/dimacs.hpp"
#include "trigsat/instrumentation.hpp"
#include "trigsat/orchestrator.hpp"

namespace trigsat {

inline constexpr int kExitSat = 10;
inline constexpr int kExitUnsat = 20;
inline constexpr int kExitUnknown = 0;
inline constexpr int kExitError = 1;

inline void write_model(std::ostream& out, const Assignment& model) {
  std::string line = "v";
  for (std::size_t v = 0; v < model.num_vars(); ++v) {
    const auto w = model[Var{static_cast<std::uint32_t>(v)}];
    const long lit = (w == TruthValue::False) ? -static_cast<long>(v + 1) : static_cast<long>(v + 1);
    const std::string token = " " + std::to_string(lit);
    if (line.size() + token.size() > 78) {
      out << line << '\n';
      line = "v";
    }
    line += token;
  }
  out << line << " 0\n";
}

inline nlohmann::json to_json(const SolverStats& s) {
  nlohmann::json imports;
  for (std::size_t i = 0; i < s.imports.size(); ++i)
    imports[std::string(to_string(static_cast<ImportOutcome>(i)))] = s.imports[i];
  return {{"conflicts", s.conflicts},
          {"decisions", s.decisions},
          {"propagations", s.propagations},
          {"restarts", s.restarts},
          {"reduces", s.reduces},
          {"learned", s.learned},
          {"learned_units", s.learned_units},
          {"removed", s.removed},
          {"exported", s.exported},
          {"snapshots_sent", s.snapshots_sent},
          {"snapshots_refused", s.snapshots_refused},
          {"snapshots_suppressed", s.snapshots_suppressed},
          {"reports_received", s.reports_received},
          {"imports", imports}};
}

// One JSON object per line: run summary, solver totals, then each table that
// was recorded.
inline void write_stats_json(std::ostream& out, const FinalAnswer& answer, const RunConfig& cfg) {
  out << nlohmann::json{{"table", "run"},
                        {"status", to_string(answer.status)},
                        {"seconds", answer.stats.seconds},
                        {"threads", cfg.threads},
                        {"engine", cfg.use_engine},
                        {"winner", answer.winner ? nlohmann::json(*answer.winner) : nlohmann::json(nullptr)}}
             .dump()
      << '\n';
  nlohmann::json per_thread = nlohmann::json::array();
  for (const auto& s : answer.stats.threads) per_thread.push_back(to_json(s));
  out << nlohmann::json{{"table", "solver_stats"}, {"total", to_json(answer.stats.total())}, {"threads", per_thread}}
             .dump()
      << '\n';
  if (answer.stats.engine) out << to_json(*answer.stats.engine).dump() << '\n';
  if (answer.stats.intervals) out << to_json(*answer.stats.intervals).dump() << '\n';
  if (answer.stats.subsets) out << to_json(*answer.stats.subsets).dump() << '\n';
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Parallel CDCL SAT solver with trigger-driven clause exchange"};
  std::string input;
  const unsigned hw = std::thread::hardware_concurrency();
  std::size_t threads = hw > 1 ? hw - 1 : 1;
  bool no_engine = false;
  std::size_t lanes = 32, groups = 32, max_clauses = EngineConfig{}.max_clauses;
  std::uint64_t seed = 0;
  double timeout = 0.0;
  std::string stats_json, csv;
  bool record_intervals = false, record_subsets = false;

  app.add_option("input", input, "DIMACS CNF file ('-' for stdin)")->required();
  app.add_option("--threads", threads, "solver threads")->check(CLI::PositiveNumber);
  app.add_flag("--no-engine", no_engine, "disable clause exchange (plain portfolio)");
  app.add_option("--lanes", lanes, "assignments per packed batch")->check(CLI::Range(1, 64));
  app.add_option("--groups", groups, "assignment groups per aggregate batch")->check(CLI::Range(1, 64));
  app.add_option("--max-engine-clauses", max_clauses, "engine clause store capacity")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--timeout", timeout, "wall-clock limit in seconds")->check(CLI::PositiveNumber);
  app.add_option("--stats-json", stats_json, "write statistics as JSON lines to PATH");
  app.add_option("--csv", csv, "write the conflict interval histogram as CSV to PATH");
  app.add_flag("--record-intervals", record_intervals, "record clause reuse intervals");
  app.add_flag("--record-subsets", record_subsets, "record per-window value subsets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  DimacsDocument doc;
  try {
    if (input == "-") {
      doc = read_dimacs(std::cin);
    } else {
      std::ifstream file(input);
      if (!file) {
        err << "c error: cannot open '" << input << "'\n";
        return kExitError;
      }
      doc = read_dimacs(file);
    }
  } catch (const ParseError& e) {
    err << "c parse error: " << e.what() << '\n';
    return kExitError;
  }
  for (const auto& w : doc.warnings) err << "c warning: " << w << '\n';

  RunConfig cfg;
  cfg.threads = threads;
  cfg.use_engine = !no_engine;
  cfg.engine.lane_width = lanes;
  cfg.engine.group_width = groups;
  cfg.engine.max_clauses = max_clauses;
  cfg.seed = seed;
  if (timeout > 0) cfg.time_limit = std::chrono::duration<double>(timeout);
  cfg.record_intervals = record_intervals || !csv.empty();
  cfg.record_subsets = record_subsets;

  FinalAnswer answer;
  try {
    answer = solve_parallel(doc.formula, cfg);
  } catch (const std::exception& e) {
    err << "c error: " << e.what() << '\n';
    return kExitError;
  }

  if (!stats_json.empty()) {
    std::ofstream f(stats_json);
    if (!f) {
      err << "c error: cannot write '" << stats_json << "'\n";
      return kExitError;
    }
    write_stats_json(f, answer, cfg);
  }
  if (!csv.empty() && answer.stats.intervals) {
    std::ofstream f(csv);
    if (!f) {
      err << "c error: cannot write '" << csv << "'\n";
      return kExitError;
    }
    write_interval_csv(f, *answer.stats.intervals);
  }

  switch (answer.status) {
    case FinalStatus::Sat:
      out << "s SATISFIABLE\n";
      write_model(out, answer.model);
      return kExitSat;
    case FinalStatus::Unsat:
      out << "s UNSATISFIABLE\n";
      return kExitUnsat;
    case FinalStatus::Unknown:
      out << "s UNKNOWN\n";
      return kExitUnknown;
    case FinalStatus::InternalError:
      err << "c internal error: " << answer.error << '\n';
      return kExitError;
  }
  return kExitError;
}

}  // namespace trigsat
