#pragma once

// Measurement helpers: how soon clauses get reused (conflict intervals),
// which value subsets variables take over fixed conflict windows, and the
// exchange engine's summary statistics. Recorders are per solver thread and
// merged at the end of a run.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "trigsat/bitpack.hpp"
#include "trigsat/core.hpp"
#include "trigsat/engine.hpp"

namespace trigsat {

enum class UseKind : std::uint8_t { Propagation = 0, ConflictAnalysis = 1 };

constexpr std::string_view to_string(UseKind k) noexcept {
  return k == UseKind::Propagation ? "propagation" : "conflict_analysis";
}

class ClauseUseRecorder {
 public:
  // Upper bounds of the finite bins; anything above the last goes to ">1000"
  // and first uses go to "inf". Repeat uses within one conflict (interval 0)
  // share the first bin.
  static constexpr std::array<std::uint64_t, 5> kBinUpper{1, 10, 100, 1000, std::numeric_limits<std::uint64_t>::max()};
  static constexpr std::array<std::string_view, 6> kBinLabels{"<=1", "2-10", "11-100", "101-1000", ">1000", "inf"};
  static constexpr std::size_t kInfiniteBin = 5;

  struct CdfRow {
    std::string_view bin;
    std::uint64_t count;
    double cumulative;
  };

  explicit ClauseUseRecorder(bool keep_raw = false) : keep_raw_(keep_raw) {}

  void record(std::uint64_t clause_id, UseKind kind, std::uint64_t conflicts) {
    const auto k = static_cast<std::size_t>(kind);
    auto [it, first] = last_use_[k].try_emplace(clause_id, conflicts);
    if (first) {
      ++counts_[k][kInfiniteBin];
      return;
    }
    const std::uint64_t interval = conflicts - it->second;
    it->second = conflicts;
    ++counts_[k][bin_of(interval)];
    if (keep_raw_) raw_[k].push_back(interval);
  }

  static std::size_t bin_of(std::uint64_t interval) noexcept {
    std::size_t b = 0;
    while (interval > kBinUpper[b]) ++b;
    return b;
  }

  std::span<const std::uint64_t, 6> counts(UseKind kind) const noexcept {
    return counts_[static_cast<std::size_t>(kind)];
  }
  std::span<const std::uint64_t> raw_intervals(UseKind kind) const noexcept {
    return raw_[static_cast<std::size_t>(kind)];
  }

  // Cumulative share of uses whose interval falls in a bin at or below each
  // row. The infinite bin is last, so the final row is 1 whenever any use
  // was recorded.
  std::vector<CdfRow> cdf(UseKind kind) const {
    const auto& c = counts_[static_cast<std::size_t>(kind)];
    std::uint64_t total = 0;
    for (auto n : c) total += n;
    std::vector<CdfRow> rows;
    std::uint64_t running = 0;
    for (std::size_t b = 0; b < c.size(); ++b) {
      running += c[b];
      rows.push_back({kBinLabels[b], c[b], total ? static_cast<double>(running) / static_cast<double>(total) : 0.0});
    }
    return rows;
  }

  // Clause ids are per thread, so merging only sums histograms.
  void merge(const ClauseUseRecorder& other) {
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t b = 0; b < counts_[k].size(); ++b) counts_[k][b] += other.counts_[k][b];
      raw_[k].insert(raw_[k].end(), other.raw_[k].begin(), other.raw_[k].end());
    }
  }

 private:
  bool keep_raw_;
  std::array<std::array<std::uint64_t, 6>, 2> counts_{};
  std::array<std::unordered_map<std::uint64_t, std::uint64_t>, 2> last_use_;
  std::array<std::vector<std::uint64_t>, 2> raw_;
};

// Per window of `window` conflicts, accumulates for every variable the set of
// values it took in the observed assignments, then tallies the sets.
// Incomplete trailing windows are never tallied.
class ValueSubsetRecorder {
 public:
  struct Row {
    std::string_view subset;
    std::uint64_t count;
    double ratio;
  };

  // Table order: {T},{F},{T,F},{U},{T,U},{F,U},{T,F,U}.
  static constexpr std::array<std::uint8_t, 7> kRowMasks{
      ValueSet::kTrue,
      ValueSet::kFalse,
      ValueSet::kTrue | ValueSet::kFalse,
      ValueSet::kUndef,
      ValueSet::kTrue | ValueSet::kUndef,
      ValueSet::kFalse | ValueSet::kUndef,
      ValueSet::kTrue | ValueSet::kFalse | ValueSet::kUndef};
  static constexpr std::array<std::string_view, 7> kRowLabels{"{T}", "{F}", "{T,F}", "{U}", "{T,U}", "{F,U}", "{T,F,U}"};

  explicit ValueSubsetRecorder(std::size_t num_vars = 0, std::uint64_t window = 32)
      : window_(window), masks_(num_vars, 0) {}

  std::uint64_t window() const noexcept { return window_; }

  void observe(std::span<const TruthValue> values) {
    if (values.size() > masks_.size()) masks_.resize(values.size(), 0);
    for (std::size_t v = 0; v < values.size(); ++v) masks_[v] |= ValueSet::flag(values[v]);
  }

  void on_conflict() {
    if (++conflicts_in_window_ < window_) return;
    for (auto& m : masks_) {
      if (m != 0) ++counts_[m];
      m = 0;
    }
    conflicts_in_window_ = 0;
    ++windows_;
  }

  std::uint64_t complete_windows() const noexcept { return windows_; }

  std::vector<Row> table() const {
    std::uint64_t total = 0;
    for (auto n : counts_) total += n;
    std::vector<Row> rows;
    for (std::size_t r = 0; r < kRowMasks.size(); ++r) {
      const auto n = counts_[kRowMasks[r]];
      rows.push_back({kRowLabels[r], n, total ? static_cast<double>(n) / static_cast<double>(total) : 0.0});
    }
    return rows;
  }

  void merge(const ValueSubsetRecorder& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    windows_ += other.windows_;
  }

 private:
  std::uint64_t window_;
  std::vector<std::uint8_t> masks_;
  std::uint64_t conflicts_in_window_ = 0;
  std::uint64_t windows_ = 0;
  std::array<std::uint64_t, 8> counts_{};
};

// Ratios are absent when their denominator is zero.
struct EngineStats {
  std::optional<double> clauses_tested_per_second;
  std::optional<double> assignment_drop_ratio;
  std::optional<double> negative_aggregate_ratio;
  std::optional<double> imports_per_assignment;
  std::uint64_t store_size = 0;
  EngineCounters raw;
};

inline EngineStats stats_summary(const EngineCounters& c) {
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (den <= 0.0) return std::nullopt;
    return num / den;
  };
  EngineStats s;
  s.raw = c;
  s.store_size = c.store_size;
  s.clauses_tested_per_second = ratio(static_cast<double>(c.clauses_tested), c.busy_seconds);
  s.assignment_drop_ratio = ratio(static_cast<double>(c.assignments_dropped),
                                  static_cast<double>(c.assignments_dropped + c.assignments_accepted));
  s.negative_aggregate_ratio = ratio(static_cast<double>(c.aggregate_negative), static_cast<double>(c.aggregate_tests));
  s.imports_per_assignment = ratio(static_cast<double>(c.reports_delivered), static_cast<double>(c.assignments_consumed));
  return s;
}

inline nlohmann::json to_json(const EngineCounters& c) {
  return {{"rounds", c.rounds},
          {"clauses_exported", c.clauses_exported},
          {"clauses_dropped", c.clauses_dropped},
          {"assignments_accepted", c.assignments_accepted},
          {"assignments_dropped", c.assignments_dropped},
          {"assignments_consumed", c.assignments_consumed},
          {"clauses_tested", c.clauses_tested},
          {"aggregate_tests", c.aggregate_tests},
          {"aggregate_negative", c.aggregate_negative},
          {"lane_tests", c.lane_tests},
          {"reports_delivered", c.reports_delivered},
          {"reports_dropped", c.reports_dropped},
          {"reports_drained", c.reports_drained},
          {"reduces", c.reduces},
          {"clauses_removed", c.clauses_removed},
          {"store_size", c.store_size},
          {"busy_seconds", c.busy_seconds}};
}

inline nlohmann::json to_json(const EngineStats& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"table", "engine_stats"},
          {"clauses_tested_per_second", opt(s.clauses_tested_per_second)},
          {"assignment_drop_ratio", opt(s.assignment_drop_ratio)},
          {"negative_aggregate_ratio", opt(s.negative_aggregate_ratio)},
          {"imports_per_assignment", opt(s.imports_per_assignment)},
          {"store_size", s.store_size},
          {"counters", to_json(s.raw)}};
}

inline nlohmann::json to_json(const ClauseUseRecorder& r) {
  nlohmann::json bins = nlohmann::json::array();
  for (auto label : ClauseUseRecorder::kBinLabels) bins.push_back(label);
  nlohmann::json out{{"table", "conflict_interval_cdf"},
                     {"bins", bins},
                     {"bin_note", "fixed bins; interval = conflicts since previous use of the same kind"}};
  for (auto kind : {UseKind::Propagation, UseKind::ConflictAnalysis}) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.cdf(kind))
      rows.push_back({{"bin", row.bin}, {"count", row.count}, {"cumulative", row.cumulative}});
    out[std::string(to_string(kind))] = rows;
  }
  return out;
}

inline nlohmann::json to_json(const ValueSubsetRecorder& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.table()) rows.push_back({{"subset", row.subset}, {"count", row.count}, {"ratio", row.ratio}});
  return {{"table", "value_subsets"}, {"window", r.window()}, {"complete_windows", r.complete_windows()}, {"rows", rows}};
}

inline void write_interval_csv(std::ostream& os, const ClauseUseRecorder& r) {
  os << "use_kind,bin,count,cumulative\n";
  for (auto kind : {UseKind::Propagation, UseKind::ConflictAnalysis})
    for (const auto& row : r.cdf(kind)) os << to_string(kind) << ',' << row.bin << ',' << row.count << ',' << row.cumulative << '\n';
}

}  // namespace trigsat
