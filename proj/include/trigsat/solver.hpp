#pragma once

// One CDCL search thread: two-watched-literal propagation, first-UIP
// learning with recursive minimization, VSIDS, phase saving, Luby restarts
// and LBD-based learned clause reduction.
//
// When connected to an Engine, the thread additionally exports every clause
// it learns, sends the last propagation fixpoint before each conflict (the
// conflict's parent assignment), and imports the clauses the engine reports
// back. Imports happen at whatever decision level the search is at; see
// import_clause for how the trail and watches are repaired.

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trigsat/core.hpp"
#include "trigsat/engine.hpp"
#include "trigsat/instrumentation.hpp"

namespace trigsat {

struct SolverConfig {
  double var_decay = 0.95;
  double clause_decay = 0.999;
  std::uint64_t restart_base = 64;  // Luby unit, in conflicts
  std::uint64_t first_reduce = 2000;
  std::uint64_t reduce_increment = 300;
  unsigned keep_lbd = 2;
  double random_var_freq = 0.0;
  bool initial_phase_negative = true;
  bool minimize = true;
  std::uint64_t seed = 91648253;
  std::uint64_t conflict_budget = 0;  // 0: unlimited
  bool export_learned = true;
  bool send_snapshots = true;
  bool import_reports = true;
};

enum class SolveStatus { Sat, Unsat, Interrupted };

enum class ImportOutcome { AttachedQuiet, AttachedImplied, AttachedAfterBacktrack, Conflicting, DuplicateSkipped };

constexpr std::string_view to_string(ImportOutcome o) noexcept {
  switch (o) {
    case ImportOutcome::AttachedQuiet: return "attached_quiet";
    case ImportOutcome::AttachedImplied: return "attached_implied";
    case ImportOutcome::AttachedAfterBacktrack: return "attached_after_backtrack";
    case ImportOutcome::Conflicting: return "conflicting";
    case ImportOutcome::DuplicateSkipped: return "duplicate_skipped";
  }
  return "?";
}

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t reduces = 0;
  std::uint64_t learned = 0;
  std::uint64_t learned_units = 0;
  std::uint64_t removed = 0;
  std::uint64_t exported = 0;
  std::uint64_t snapshots_sent = 0;
  std::uint64_t snapshots_refused = 0;
  std::uint64_t snapshots_suppressed = 0;
  std::uint64_t reports_received = 0;
  std::array<std::uint64_t, 5> imports{};  // indexed by ImportOutcome

  std::uint64_t import_count(ImportOutcome o) const noexcept { return imports[static_cast<std::size_t>(o)]; }
};

struct AnalysisResult {
  Clause learned;  // asserting literal first, a backjump-level literal second
  int backjump_level = 0;
  unsigned lbd = 0;
};

using ClauseRef = std::uint32_t;
inline constexpr ClauseRef kNoClause = std::numeric_limits<ClauseRef>::max();

// Max-heap of variables keyed on an external activity array.
class VarOrder {
 public:
  explicit VarOrder(const std::vector<double>& activity) : activity_(activity) {}

  bool empty() const noexcept { return heap_.empty(); }
  bool contains(std::uint32_t v) const noexcept { return v < index_.size() && index_[v] >= 0; }

  void insert(std::uint32_t v) {
    if (v >= index_.size()) index_.resize(v + 1, -1);
    if (contains(v)) return;
    index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(heap_.size() - 1);
  }

  void increased(std::uint32_t v) {
    if (contains(v)) up(static_cast<std::size_t>(index_[v]));
  }

  std::uint32_t pop() {
    const std::uint32_t top = heap_.front();
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    index_[top] = -1;
    if (!heap_.empty()) {
      heap_[0] = last;
      index_[last] = 0;
      down(0);
    }
    return top;
  }

 private:
  bool before(std::uint32_t a, std::uint32_t b) const noexcept { return activity_[a] > activity_[b]; }

  void up(std::size_t i) {
    const std::uint32_t v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!before(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      index_[heap_[i]] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    index_[v] = static_cast<int>(i);
  }

  void down(std::size_t i) {
    const std::uint32_t v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && before(heap_[child + 1], heap_[child])) ++child;
      if (!before(heap_[child], v)) break;
      heap_[i] = heap_[child];
      index_[heap_[i]] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    index_[v] = static_cast<int>(i);
  }

  const std::vector<double>& activity_;
  std::vector<std::uint32_t> heap_;
  std::vector<int> index_;
};

// Finite Luby sequence value (1,1,2,1,1,2,4,...) for 0-based index x.
inline std::uint64_t luby(std::uint64_t x) {
  std::uint64_t size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::uint64_t{1} << seq;
}

// Order-independent signature of a literal set.
inline std::uint64_t clause_signature(std::span<const Lit> lits) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ lits.size();
  for (Lit l : lits) {
    std::uint64_t x = l.code() + 0x632be59bd9b4e019ull;
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 29;
    h += x;
  }
  return h;
}

class Solver {
 public:
  Solver(const Formula& formula, std::size_t thread_id = 0, SolverConfig config = {}, Engine* engine = nullptr,
         const std::atomic<bool>* stop = nullptr)
      : config_(config),
        thread_id_(thread_id),
        engine_(engine),
        stop_(stop),
        num_vars_(formula.num_vars),
        values_(formula.num_vars),
        level_(formula.num_vars, 0),
        reason_(formula.num_vars, kNoClause),
        activity_(formula.num_vars, 0.0),
        polarity_(formula.num_vars, config.initial_phase_negative),
        seen_(formula.num_vars, 0),
        watches_(2 * formula.num_vars),
        order_(activity_),
        rng_(config.seed + 0x9e3779b97f4a7c15ull * (thread_id + 1)) {
    for (std::uint32_t v = 0; v < num_vars_; ++v) order_.insert(v);
    next_reduce_ = config_.first_reduce;
    restart_limit_ = config_.restart_base * luby(0);

    std::vector<Clause> units;
    for (const auto& raw : formula.clauses) {
      for (Lit l : raw)
        if (l.var().index >= num_vars_) throw std::invalid_argument("literal " + std::to_string(l.to_dimacs()) + " out of range");
      auto c = normalize_clause(raw);
      if (!c) continue;
      if (c->empty()) {
        ok_ = false;
        continue;
      }
      if (c->size() == 1) {
        units.push_back(*c);
        continue;
      }
      const ClauseRef cr = store_clause(std::move(*c), /*learnt=*/false);
      attach(cr);
    }
    for (const auto& u : units) {
      unit_signatures_.insert(u[0].code());
      const TruthValue w = value(u[0]);
      if (w == TruthValue::False) ok_ = false;
      if (w == TruthValue::Undef) enqueue(u[0], kNoClause);
    }
    if (ok_ && propagate()) ok_ = false;
  }

  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  // ---------------------------------------------------------------- search

  SolveStatus solve() {
    if (!ok_) return SolveStatus::Unsat;
    const std::uint64_t budget_start = stats_.conflicts;
    for (;;) {
      if (stop_ && stop_->load(std::memory_order_relaxed)) return SolveStatus::Interrupted;
      if (config_.conflict_budget && stats_.conflicts - budget_start >= config_.conflict_budget)
        return SolveStatus::Interrupted;

      if (engine_ && config_.import_reports) {
        import_reports();
        if (!ok_) return SolveStatus::Unsat;
      }

      if (auto conflict = propagate()) {
        ++conflicts_since_restart_;
        if (!resolve_conflict(*conflict)) return SolveStatus::Unsat;
        continue;
      }

      if (conflicts_since_restart_ >= restart_limit_) {
        ++stats_.restarts;
        conflicts_since_restart_ = 0;
        restart_limit_ = config_.restart_base * luby(stats_.restarts);
        cancel_until(0);
        continue;
      }
      if (stats_.conflicts >= next_reduce_) {
        next_reduce_ = stats_.conflicts + config_.first_reduce + config_.reduce_increment * (stats_.reduces + 1);
        reduce_db();
      }

      const std::optional<Lit> next = pick_branch();
      if (!next) {
        model_ = values_;
        return SolveStatus::Sat;
      }
      new_decision(*next);
    }
  }

  // Unit propagation to fixpoint. Returns the conflicting clause, if any. A
  // conflict-free fixpoint becomes the new parent assignment.
  std::optional<ClauseRef> propagate() {
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];
      ++stats_.propagations;
      auto& ws = watches_[p.code()];
      const Lit false_lit = ~p;
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        const ClauseRef cr = ws[i++];
        if (clauses_[cr].removed) continue;
        auto& c = clauses_[cr].lits;
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        const Lit first = c[0];
        if (value(first) == TruthValue::True) {
          ws[j++] = cr;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != TruthValue::False) {
            std::swap(c[1], c[k]);
            watches_[(~c[1]).code()].push_back(cr);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = cr;
        if (value(first) == TruthValue::False) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          qhead_ = trail_.size();
          return cr;
        }
        enqueue(first, cr);
        if (uses_) uses_->record(clauses_[cr].id, UseKind::Propagation, stats_.conflicts);
      }
      ws.resize(j);
    }
    parent_length_ = trail_.size();
    parent_on_trail_ = true;
    if (subsets_) subsets_->observe(values_.values());
    return std::nullopt;
  }

  // First-UIP analysis of a clause that is false at the current level (> 0).
  AnalysisResult analyze(ClauseRef conflict) {
    if (decision_level() == 0) throw std::logic_error("analyze at level 0");
    AnalysisResult out;
    Clause& learned = out.learned;
    learned.push_back(Lit{});
    int path_count = 0;
    std::optional<Lit> p;
    std::size_t index = trail_.size();
    ClauseRef cr = conflict;
    do {
      assert(cr != kNoClause);
      auto& c = clauses_[cr];
      if (c.learnt) bump_clause(c);
      if (uses_) uses_->record(c.id, UseKind::ConflictAnalysis, stats_.conflicts);
      for (std::size_t j = p ? 1 : 0; j < c.lits.size(); ++j) {
        const Lit q = c.lits[j];
        const auto v = q.var().index;
        if (seen_[v] || level_[v] == 0) continue;
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path_count;
        else
          learned.push_back(q);
      }
      while (!seen_[trail_[--index].var().index]) {
      }
      p = trail_[index];
      cr = reason_[p->var().index];
      seen_[p->var().index] = 0;
      --path_count;
    } while (path_count > 0);
    learned[0] = ~*p;

    analyze_toclear_.assign(learned.begin(), learned.end());
    if (config_.minimize) {
      std::uint32_t abstract = 0;
      for (std::size_t i = 1; i < learned.size(); ++i) abstract |= abstract_level(learned[i].var().index);
      std::size_t keep = 1;
      for (std::size_t i = 1; i < learned.size(); ++i) {
        const auto v = learned[i].var().index;
        if (reason_[v] == kNoClause || !redundant(learned[i], abstract)) learned[keep++] = learned[i];
      }
      learned.resize(keep);
    }
    for (Lit l : analyze_toclear_) seen_[l.var().index] = 0;

    if (learned.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learned.size(); ++i)
        if (level_[learned[i].var().index] > level_[learned[max_i].var().index]) max_i = i;
      std::swap(learned[1], learned[max_i]);
      out.backjump_level = level_[learned[1].var().index];
    }
    out.lbd = compute_lbd(learned);
    return out;
  }

  // Handles a conflict found by propagate(): sends the parent assignment to
  // the engine, then analyses, learns and backjumps. Returns false when the
  // conflict is at level 0.
  bool resolve_conflict(ClauseRef conflict) {
    ++stats_.conflicts;
    if (subsets_) subsets_->on_conflict();
    if (decision_level() == 0) {
      ok_ = false;
      return false;
    }
    send_parent_snapshot();
    learn(analyze(conflict));
    decay_activities();
    return true;
  }

  // Backjumps, records the learned clause, asserts its first literal and
  // exports it.
  void learn(const AnalysisResult& a) {
    cancel_until(a.backjump_level);
    ++stats_.learned;
    if (a.learned.size() == 1) {
      ++stats_.learned_units;
      unit_signatures_.insert(a.learned[0].code());
      enqueue(a.learned[0], kNoClause);
    } else {
      const ClauseRef cr = store_clause(a.learned, /*learnt=*/true);
      clauses_[cr].lbd = a.lbd;
      attach(cr);
      bump_clause(clauses_[cr]);
      enqueue(a.learned[0], cr);
    }
    if (engine_ && config_.export_learned) {
      engine_->add_clause(a.learned, thread_id_);
      ++stats_.exported;
    }
  }

  void new_decision(Lit l) {
    if (value(l) != TruthValue::Undef) throw std::logic_error("decision on assigned literal " + std::to_string(l.to_dimacs()));
    ++stats_.decisions;
    trail_lim_.push_back(trail_.size());
    enqueue(l, kNoClause);
  }

  void cancel_until(int level) {
    if (decision_level() <= level) return;
    const std::size_t keep = trail_lim_[static_cast<std::size_t>(level)];
    if (parent_on_trail_ && keep < parent_length_) {
      parent_lits_.assign(trail_.begin(), trail_.begin() + static_cast<std::ptrdiff_t>(parent_length_));
      parent_on_trail_ = false;
    }
    for (std::size_t i = trail_.size(); i-- > keep;) {
      const Lit l = trail_[i];
      const auto v = l.var().index;
      values_.set(l.var(), TruthValue::Undef);
      reason_[v] = kNoClause;
      polarity_[v] = l.is_negative();
      order_.insert(v);
    }
    trail_.resize(keep);
    trail_lim_.resize(static_cast<std::size_t>(level));
    qhead_ = std::min(qhead_, trail_.size());
    if (subsets_) subsets_->observe(values_.values());
  }

  // ---------------------------------------------------------------- import

  // Adds a clause at the current decision level, repairing the trail so that
  // the watch invariant holds for it immediately:
  //  - two or more non-False literals: attach as is;
  //  - one Undef, rest False: backtrack to the highest False level and imply
  //    the Undef literal there;
  //  - one True, rest False (highest False level L): if the True literal sits
  //    above L, backtrack to L and imply it there, otherwise just attach;
  //  - all False, two highest levels L1 <= L2: if L1 < L2 backtrack to L1
  //    and imply the L2 literal, otherwise analyse the conflict at L1.
  ImportOutcome import_clause(std::span<const Lit> literals) {
    auto outcome = import_impl(literals);
    ++stats_.imports[static_cast<std::size_t>(outcome)];
    return outcome;
  }

  std::size_t import_reports() {
    if (!engine_) return 0;
    auto reports = engine_->drain_reports(thread_id_);
    stats_.reports_received += reports.size();
    for (const auto& r : reports) {
      import_clause(r.literals);
      if (!ok_) break;
    }
    return reports.size();
  }

  // ----------------------------------------------------------- inspection

  bool ok() const noexcept { return ok_; }
  std::size_t thread_id() const noexcept { return thread_id_; }
  std::size_t num_vars() const noexcept { return num_vars_; }
  int decision_level() const noexcept { return static_cast<int>(trail_lim_.size()); }
  TruthValue value(Var v) const noexcept { return values_[v]; }
  TruthValue value(Lit l) const noexcept { return eval_literal(values_, l); }
  int level(Var v) const noexcept { return level_[v.index]; }
  ClauseRef reason(Var v) const noexcept { return reason_[v.index]; }
  std::span<const Lit> trail() const noexcept { return trail_; }
  const Assignment& assignment() const noexcept { return values_; }
  const Assignment& model() const noexcept { return model_; }
  const SolverStats& stats() const noexcept { return stats_; }
  const SolverConfig& config() const noexcept { return config_; }
  std::span<const Lit> clause(ClauseRef cr) const { return clauses_.at(cr).lits; }
  bool pending_propagation() const noexcept { return qhead_ < trail_.size(); }

  std::size_t num_learnts() const {
    return static_cast<std::size_t>(
        std::count_if(clauses_.begin(), clauses_.end(), [](const ClauseData& c) { return !c.removed && c.learnt; }));
  }

  // The last conflict-free propagation fixpoint.
  Assignment parent_assignment() const {
    Assignment a(num_vars_);
    if (parent_on_trail_) {
      for (std::size_t i = 0; i < parent_length_; ++i) a.assign(trail_[i]);
    } else {
      for (Lit l : parent_lits_) a.assign(l);
    }
    return a;
  }

  // True if a clause with this literal set is currently held (attached, or a
  // level-0 unit).
  bool holds(std::span<const Lit> literals) const {
    if (literals.size() == 1) return unit_signatures_.contains(literals[0].code());
    return find_clause(literals) != kNoClause;
  }

  // Drops a held learned clause. Returns false if none matches or the clause
  // is the reason of a current assignment.
  bool forget_clause(std::span<const Lit> literals) {
    const ClauseRef cr = find_clause(literals);
    if (cr == kNoClause || !clauses_[cr].learnt || locked(cr)) return false;
    remove_clause(cr);
    purge_watches();
    return true;
  }

  void set_recorders(ClauseUseRecorder* uses, ValueSubsetRecorder* subsets) {
    uses_ = uses;
    subsets_ = subsets;
  }

  // Checks the watch invariant of every attached clause; at a propagation
  // fixpoint, each clause must have a True watch (whose False partner sits
  // no lower) or two non-False watches.
  bool check_watches() const {
    for (ClauseRef cr = 0; cr < clauses_.size(); ++cr)
      if (!clauses_[cr].removed && !check_watch(cr)) return false;
    return true;
  }

  bool check_watch(ClauseRef cr) const {
    const auto& c = clauses_[cr];
    if (c.removed || c.lits.size() < 2) return false;
    if (!is_watching(c.lits[0], cr) || !is_watching(c.lits[1], cr)) return false;
    const TruthValue a = value(c.lits[0]), b = value(c.lits[1]);
    auto ok_pair = [&](Lit t, TruthValue tv, Lit o, TruthValue ov) {
      return tv == TruthValue::True && (ov != TruthValue::False || level(o.var()) >= level(t.var()));
    };
    if (a != TruthValue::False && b != TruthValue::False) return true;
    return ok_pair(c.lits[0], a, c.lits[1], b) || ok_pair(c.lits[1], b, c.lits[0], a);
  }

  // Every implied trail literal has a reason clause containing it whose other
  // literals are False at no higher level.
  bool check_reasons() const {
    for (Lit p : trail_) {
      const ClauseRef cr = reason_[p.var().index];
      if (cr == kNoClause) continue;
      const auto& c = clauses_[cr];
      if (c.removed || c.lits.empty() || c.lits[0] != p) return false;
      for (std::size_t i = 1; i < c.lits.size(); ++i) {
        if (value(c.lits[i]) != TruthValue::False) return false;
        if (level(c.lits[i].var()) > level(p.var())) return false;
      }
    }
    return true;
  }

  // Test access: find the clause reference that holds exactly these literals.
  ClauseRef find_clause(std::span<const Lit> literals) const {
    auto it = signatures_.find(clause_signature(literals));
    if (it == signatures_.end()) return kNoClause;
    Clause wanted(literals.begin(), literals.end());
    std::sort(wanted.begin(), wanted.end());
    for (ClauseRef cr : it->second) {
      Clause have = clauses_[cr].lits;
      std::sort(have.begin(), have.end());
      if (have == wanted) return cr;
    }
    return kNoClause;
  }

 private:
  struct ClauseData {
    Clause lits;
    std::uint64_t id = 0;
    std::uint64_t signature = 0;
    double activity = 0.0;
    unsigned lbd = 0;
    bool learnt = false;
    bool imported = false;
    bool removed = false;
  };

  ImportOutcome import_impl(std::span<const Lit> literals) {
    if (!ok_) return ImportOutcome::Conflicting;
    for (Lit l : literals)
      if (l.var().index >= num_vars_) throw std::invalid_argument("imported literal out of range");
    if (literals.empty()) {
      ok_ = false;
      return ImportOutcome::Conflicting;
    }
    if (holds(literals)) return ImportOutcome::DuplicateSkipped;

    Clause c(literals.begin(), literals.end());
    // Order: non-False literals first (True before Undef), then False ones
    // by decreasing level. c[0] and c[1] become the watches.
    auto rank = [&](Lit l) {
      const TruthValue w = value(l);
      if (w == TruthValue::True) return 0;
      if (w == TruthValue::Undef) return 1;
      return 2;
    };
    std::stable_sort(c.begin(), c.end(), [&](Lit a, Lit b) {
      const int ra = rank(a), rb = rank(b);
      if (ra != rb) return ra < rb;
      return ra == 2 && level(a.var()) > level(b.var());
    });
    std::size_t non_false = 0, num_true = 0;
    for (Lit l : c) {
      if (value(l) == TruthValue::True) ++num_true;
      if (value(l) != TruthValue::False) ++non_false;
    }

    if (c.size() == 1) return import_unit(c[0]);

    if (non_false >= 2) {
      attach(store_clause(std::move(c), /*learnt=*/true, /*imported=*/true));
      return ImportOutcome::AttachedQuiet;
    }

    if (non_false == 1) {
      const int false_level = level(c[1].var());  // highest False level
      if (num_true == 0) {
        cancel_until(false_level);
        const ClauseRef cr = store_clause(std::move(c), true, true);
        attach(cr);
        enqueue(clauses_[cr].lits[0], cr);
        return ImportOutcome::AttachedImplied;
      }
      if (level(c[0].var()) > false_level) {
        cancel_until(false_level);
        const ClauseRef cr = store_clause(std::move(c), true, true);
        attach(cr);
        enqueue(clauses_[cr].lits[0], cr);
        return ImportOutcome::AttachedAfterBacktrack;
      }
      attach(store_clause(std::move(c), true, true));
      return ImportOutcome::AttachedQuiet;
    }

    // All False: c[0] has the highest level, c[1] the second highest.
    const int top = level(c[0].var());
    const int second = level(c[1].var());
    if (second < top) {
      cancel_until(second);
      const ClauseRef cr = store_clause(std::move(c), true, true);
      attach(cr);
      enqueue(clauses_[cr].lits[0], cr);
      return ImportOutcome::AttachedAfterBacktrack;
    }
    if (top == 0) {
      ok_ = false;
      return ImportOutcome::Conflicting;
    }
    cancel_until(top);
    const ClauseRef cr = store_clause(std::move(c), true, true);
    attach(cr);
    ++stats_.conflicts;
    if (subsets_) subsets_->on_conflict();
    learn(analyze(cr));
    decay_activities();
    return ImportOutcome::Conflicting;
  }

  ImportOutcome import_unit(Lit l) {
    const TruthValue w = value(l);
    if (w == TruthValue::False && level(l.var()) == 0) {
      ok_ = false;
      return ImportOutcome::Conflicting;
    }
    unit_signatures_.insert(l.code());
    if (w == TruthValue::True && level(l.var()) == 0) return ImportOutcome::AttachedQuiet;
    const bool backtracked = decision_level() > 0;
    cancel_until(0);
    enqueue(l, kNoClause);
    return (w == TruthValue::Undef && !backtracked) ? ImportOutcome::AttachedImplied
                                                     : ImportOutcome::AttachedAfterBacktrack;
  }

  void send_parent_snapshot() {
    if (!engine_ || !config_.send_snapshots) return;
    Assignment parent = parent_assignment();
    if (last_snapshot_ && *last_snapshot_ == parent) {
      ++stats_.snapshots_suppressed;
      return;
    }
    if (engine_->submit_assignment({thread_id_, parent, 0})) {
      ++stats_.snapshots_sent;
      last_snapshot_ = std::move(parent);
    } else {
      ++stats_.snapshots_refused;
    }
  }

  std::optional<Lit> pick_branch() {
    std::optional<std::uint32_t> next;
    if (config_.random_var_freq > 0.0 && !order_.empty() &&
        std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.random_var_freq) {
      const auto v = std::uniform_int_distribution<std::uint32_t>(0, static_cast<std::uint32_t>(num_vars_ - 1))(rng_);
      if (values_[Var{v}] == TruthValue::Undef) next = v;
    }
    while (!next) {
      if (order_.empty()) return std::nullopt;
      const auto v = order_.pop();
      if (values_[Var{v}] == TruthValue::Undef) next = v;
    }
    return Lit(Var{*next}, polarity_[*next]);
  }

  void enqueue(Lit l, ClauseRef from) {
    assert(value(l) == TruthValue::Undef);
    const auto v = l.var().index;
    values_.assign(l);
    level_[v] = decision_level();
    reason_[v] = from;
    trail_.push_back(l);
  }

  ClauseRef store_clause(Clause lits, bool learnt, bool imported = false) {
    ClauseRef cr;
    if (!free_.empty()) {
      cr = free_.back();
      free_.pop_back();
      clauses_[cr] = ClauseData{};
    } else {
      cr = static_cast<ClauseRef>(clauses_.size());
      clauses_.emplace_back();
    }
    auto& c = clauses_[cr];
    c.lits = std::move(lits);
    c.id = next_clause_id_++;
    c.learnt = learnt;
    c.imported = imported;
    c.signature = clause_signature(c.lits);
    if (imported) c.lbd = compute_lbd(c.lits);
    signatures_[c.signature].push_back(cr);
    return cr;
  }

  void attach(ClauseRef cr) {
    const auto& c = clauses_[cr].lits;
    assert(c.size() >= 2);
    watches_[(~c[0]).code()].push_back(cr);
    watches_[(~c[1]).code()].push_back(cr);
  }

  bool is_watching(Lit l, ClauseRef cr) const {
    const auto& ws = watches_[(~l).code()];
    return std::find(ws.begin(), ws.end(), cr) != ws.end();
  }

  bool locked(ClauseRef cr) const {
    const auto& c = clauses_[cr].lits;
    return value(c[0]) == TruthValue::True && reason_[c[0].var().index] == cr;
  }

  // Marks removed and forgets the signature. Watchers are purged in bulk.
  void remove_clause(ClauseRef cr) {
    auto& c = clauses_[cr];
    auto it = signatures_.find(c.signature);
    if (it != signatures_.end()) {
      std::erase(it->second, cr);
      if (it->second.empty()) signatures_.erase(it);
    }
    c.removed = true;
    ++stats_.removed;
  }

  void purge_watches() {
    for (auto& ws : watches_) std::erase_if(ws, [&](ClauseRef cr) { return clauses_[cr].removed; });
    for (ClauseRef cr = 0; cr < clauses_.size(); ++cr) {
      if (clauses_[cr].removed && !clauses_[cr].lits.empty()) {
        clauses_[cr].lits.clear();
        clauses_[cr].lits.shrink_to_fit();
        free_.push_back(cr);
      }
    }
  }

  // Keeps learned clauses with small LBD, and the more active half of the rest.
  void reduce_db() {
    ++stats_.reduces;
    std::vector<ClauseRef> candidates;
    for (ClauseRef cr = 0; cr < clauses_.size(); ++cr) {
      const auto& c = clauses_[cr];
      if (!c.removed && c.learnt && c.lbd > config_.keep_lbd && !locked(cr)) candidates.push_back(cr);
    }
    std::sort(candidates.begin(), candidates.end(), [&](ClauseRef a, ClauseRef b) {
      if (clauses_[a].activity != clauses_[b].activity) return clauses_[a].activity < clauses_[b].activity;
      return clauses_[a].id < clauses_[b].id;
    });
    for (std::size_t i = 0; i < candidates.size() / 2; ++i) remove_clause(candidates[i]);
    purge_watches();
  }

  bool redundant(Lit p, std::uint32_t abstract) {
    analyze_stack_.clear();
    analyze_stack_.push_back(p);
    const std::size_t top = analyze_toclear_.size();
    while (!analyze_stack_.empty()) {
      const Lit q = analyze_stack_.back();
      analyze_stack_.pop_back();
      const auto& c = clauses_[reason_[q.var().index]].lits;
      for (std::size_t i = 1; i < c.size(); ++i) {
        const Lit l = c[i];
        const auto v = l.var().index;
        if (seen_[v] || level_[v] == 0) continue;
        if (reason_[v] != kNoClause && (abstract_level(v) & abstract) != 0) {
          seen_[v] = 1;
          analyze_stack_.push_back(l);
          analyze_toclear_.push_back(l);
        } else {
          for (std::size_t j = top; j < analyze_toclear_.size(); ++j) seen_[analyze_toclear_[j].var().index] = 0;
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  std::uint32_t abstract_level(std::uint32_t v) const noexcept { return 1u << (level_[v] & 31); }

  unsigned compute_lbd(std::span<const Lit> lits) {
    ++lbd_stamp_;
    unsigned n = 0;
    for (Lit l : lits) {
      if (value(l) == TruthValue::Undef) {
        ++n;
        continue;
      }
      const auto lvl = static_cast<std::size_t>(level(l.var()));
      if (lvl >= lbd_marks_.size()) lbd_marks_.resize(lvl + 1, 0);
      if (lbd_marks_[lvl] != lbd_stamp_) {
        lbd_marks_[lvl] = lbd_stamp_;
        ++n;
      }
    }
    return std::clamp<unsigned>(n, lits.empty() ? 0u : 1u, static_cast<unsigned>(lits.size()));
  }

  void bump_var(std::uint32_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    order_.increased(v);
  }

  void bump_clause(ClauseData& c) {
    if ((c.activity += clause_inc_) > 1e20) {
      for (auto& d : clauses_)
        if (d.learnt) d.activity *= 1e-20;
      clause_inc_ *= 1e-20;
    }
  }

  void decay_activities() {
    var_inc_ /= config_.var_decay;
    clause_inc_ /= config_.clause_decay;
  }

  SolverConfig config_;
  std::size_t thread_id_;
  Engine* engine_;
  const std::atomic<bool>* stop_;
  std::size_t num_vars_;
  bool ok_ = true;

  Assignment values_;
  std::vector<int> level_;
  std::vector<ClauseRef> reason_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<ClauseData> clauses_;
  std::vector<ClauseRef> free_;
  std::uint64_t next_clause_id_ = 0;
  std::unordered_map<std::uint64_t, std::vector<ClauseRef>> signatures_;
  std::unordered_set<std::uint32_t> unit_signatures_;

  std::vector<double> activity_;
  std::vector<bool> polarity_;  // true: negative
  std::vector<char> seen_;
  // watches_[p] lists clauses watching ~p, visited when p becomes True.
  std::vector<std::vector<ClauseRef>> watches_;
  VarOrder order_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  std::vector<Lit> analyze_stack_;
  std::vector<Lit> analyze_toclear_;
  std::vector<std::uint64_t> lbd_marks_;
  std::uint64_t lbd_stamp_ = 0;
  std::mt19937_64 rng_;

  std::uint64_t conflicts_since_restart_ = 0;
  std::uint64_t restart_limit_ = 0;
  std::uint64_t next_reduce_ = 0;

  std::size_t parent_length_ = 0;
  bool parent_on_trail_ = true;
  std::vector<Lit> parent_lits_;
  std::optional<Assignment> last_snapshot_;

  Assignment model_;
  SolverStats stats_;
  ClauseUseRecorder* uses_ = nullptr;
  ValueSubsetRecorder* subsets_ = nullptr;
};

}  // namespace trigsat
