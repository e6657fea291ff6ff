#pragma once

// The exchange engine. Solver threads export every clause they learn and
// every conflict-parent assignment to it; the engine periodically tests all
// stored clauses against all assignments received since the previous round
// and routes each clause that triggers back to the thread that produced the
// assignment. Stored clauses are ranked by how often they trigger and the
// least active ones are evicted when the store fills up.
//
// Threading: add_clause, submit_assignment and drain_reports may be called
// from any thread. run_round, reduce_store, ingest_exports and store() belong
// to the single engine worker.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "trigsat/bitpack.hpp"
#include "trigsat/clause_store.hpp"
#include "trigsat/core.hpp"
#include "trigsat/worker_pool.hpp"

namespace trigsat {

struct EngineConfig {
  std::size_t max_clauses = 5'000'000;
  std::size_t lane_width = 32;
  std::size_t group_width = 32;
  // Per solver thread. 0 means two full batches.
  std::size_t assignment_queue_capacity = 0;
  std::size_t export_queue_capacity = std::size_t{1} << 20;
  std::size_t report_queue_capacity = std::size_t{1} << 16;
  double activity_decay = 0.999;
  double reduce_keep_fraction = 0.5;
  std::size_t worker_threads = 1;
  // Clauses per parallel task during a round.
  std::size_t task_grain = 4096;

  std::size_t snapshot_queue_capacity() const noexcept {
    return assignment_queue_capacity ? assignment_queue_capacity : 2 * lane_width;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("EngineConfig: " + what); };
    if (max_clauses < 1) fail("max_clauses must be >= 1");
    if (lane_width < 1 || lane_width > 64) fail("lane_width must be in 1..64");
    if (group_width < 1 || group_width > 64) fail("group_width must be in 1..64");
    if (export_queue_capacity < 1 || report_queue_capacity < 1) fail("queue capacities must be >= 1");
    if (!(activity_decay > 0.0 && activity_decay <= 1.0)) fail("activity_decay must be in (0, 1]");
    if (!(reduce_keep_fraction > 0.0 && reduce_keep_fraction < 1.0)) fail("reduce_keep_fraction must be in (0, 1)");
    if (task_grain < 1) fail("task_grain must be >= 1");
  }
};

struct AssignmentSnapshot {
  std::size_t thread = 0;
  Assignment values;
  // Stamped by the engine on acceptance.
  std::uint64_t sequence = 0;
};

struct Report {
  std::size_t thread = 0;
  Clause literals;
  std::uint64_t engine_id = 0;
  // Sequence numbers of the consumed snapshots of `thread` on which the
  // clause triggered, ascending.
  std::vector<std::uint64_t> triggered_by;
};

struct RoundResult {
  std::size_t reports = 0;
  std::size_t assignments_consumed = 0;
  std::size_t groups = 0;
  std::uint64_t clauses_tested = 0;  // stored clauses x consumed assignments
  std::uint64_t aggregate_tests = 0;
  std::uint64_t aggregate_negative = 0;
  std::uint64_t lane_tests = 0;  // lanes examined after a positive aggregate
  std::size_t removed = 0;
  double seconds = 0.0;
};

struct EngineCounters {
  std::uint64_t rounds = 0;
  std::uint64_t clauses_exported = 0;
  std::uint64_t clauses_dropped = 0;
  std::uint64_t assignments_accepted = 0;
  std::uint64_t assignments_dropped = 0;
  std::uint64_t assignments_consumed = 0;
  std::uint64_t clauses_tested = 0;
  std::uint64_t aggregate_tests = 0;
  std::uint64_t aggregate_negative = 0;
  std::uint64_t lane_tests = 0;
  std::uint64_t reports_delivered = 0;
  std::uint64_t reports_dropped = 0;
  std::uint64_t reports_drained = 0;
  std::uint64_t reduces = 0;
  std::uint64_t clauses_removed = 0;
  std::uint64_t store_size = 0;
  double busy_seconds = 0.0;
};

// Everything a round saw, for offline checking. Only collected while an
// observer is installed.
struct RoundTrace {
  std::vector<AssignmentSnapshot> consumed;
  std::vector<std::pair<std::uint64_t, Clause>> clauses;
  std::vector<Report> reports;
};

class Engine {
 public:
  using Word = std::uint64_t;

  explicit Engine(std::size_t num_threads, EngineConfig config = {})
      : config_(std::move(config)), pool_(config_.worker_threads) {
    config_.validate();
    if (num_threads == 0) throw std::invalid_argument("Engine needs at least one solver thread");
    snapshots_.resize(num_threads);
    for (std::size_t t = 0; t < num_threads; ++t) report_queues_.push_back(std::make_unique<ReportQueue>());
  }

  const EngineConfig& config() const noexcept { return config_; }
  std::size_t num_threads() const noexcept { return report_queues_.size(); }

  // Queues a clause for insertion at the next round. Every call consumes a
  // fresh id, including calls whose clause is later dropped.
  std::uint64_t add_clause(std::span<const Lit> literals, std::size_t origin) {
    if (literals.empty()) throw std::invalid_argument("cannot export the empty clause");
    const std::uint64_t id = next_id_.fetch_add(1, std::memory_order_relaxed);
    {
      std::lock_guard lock(inbox_mutex_);
      if (exports_.size() >= config_.export_queue_capacity) {
        clauses_dropped_.fetch_add(1, std::memory_order_relaxed);
        return id;
      }
      exports_.push_back({Clause(literals.begin(), literals.end()), static_cast<std::uint32_t>(origin), id});
    }
    clauses_exported_.fetch_add(1, std::memory_order_relaxed);
    work_.notify_one();
    return id;
  }

  bool submit_assignment(AssignmentSnapshot snapshot) {
    if (snapshot.thread >= num_threads()) throw std::out_of_range("snapshot from unknown thread");
    {
      std::lock_guard lock(inbox_mutex_);
      auto& queue = snapshots_[snapshot.thread];
      if (queue.size() >= config_.snapshot_queue_capacity()) {
        assignments_dropped_.fetch_add(1, std::memory_order_relaxed);
        return false;
      }
      snapshot.sequence = next_sequence_++;
      queue.push_back(std::move(snapshot));
    }
    assignments_accepted_.fetch_add(1, std::memory_order_relaxed);
    work_.notify_one();
    return true;
  }

  std::vector<Report> drain_reports(std::size_t thread) {
    auto& q = *report_queues_.at(thread);
    std::vector<Report> out;
    {
      std::lock_guard lock(q.mutex);
      out.assign(std::make_move_iterator(q.reports.begin()), std::make_move_iterator(q.reports.end()));
      q.reports.clear();
    }
    reports_drained_.fetch_add(out.size(), std::memory_order_relaxed);
    return out;
  }

  bool has_pending_work() {
    std::lock_guard lock(inbox_mutex_);
    return has_pending_work_locked();
  }

  // Moves exported clauses into the store, evicting or dropping at capacity.
  std::size_t ingest_exports() {
    std::vector<PendingClause> incoming;
    {
      std::lock_guard lock(inbox_mutex_);
      incoming.swap(exports_);
    }
    std::size_t inserted = 0;
    for (auto& c : incoming) {
      if (store_.size() >= config_.max_clauses) {
        reduce_store();
        if (store_.size() >= config_.max_clauses) {
          clauses_dropped_.fetch_add(1, std::memory_order_relaxed);
          continue;
        }
      }
      store_.insert(c.literals, {c.engine_id, bump_, c.origin, epoch_});
      ++inserted;
    }
    return inserted;
  }

  RoundResult run_round() {
    const auto start = std::chrono::steady_clock::now();
    RoundResult result;
    ingest_exports();

    std::vector<std::deque<AssignmentSnapshot>> pending(num_threads());
    {
      std::lock_guard lock(inbox_mutex_);
      pending.swap(snapshots_);
      snapshots_.resize(num_threads());
    }

    // Group snapshots per thread, lane_width at a time.
    std::vector<GroupInfo> groups;
    std::vector<PackedAssignmentBatch<Word>> batches;
    std::size_t num_vars = 0;
    for (const auto& q : pending)
      for (const auto& s : q) num_vars = std::max(num_vars, s.values.num_vars());
    for (std::size_t t = 0; t < pending.size(); ++t) {
      for (const auto& s : pending[t]) {
        if (groups.empty() || groups.back().thread != t || batches.back().lane_count() == config_.lane_width) {
          groups.push_back({t, {}});
          batches.emplace_back(num_vars, config_.lane_width);
        }
        batches.back().push(s.values);
        groups.back().sequences.push_back(s.sequence);
        ++result.assignments_consumed;
      }
    }
    result.groups = groups.size();

    std::vector<AggregateBatch<Word>> aggregates;
    for (std::size_t first = 0; first < batches.size(); first += config_.group_width) {
      const std::size_t n = std::min(config_.group_width, batches.size() - first);
      aggregates.push_back(build_aggregate_batch<Word, Word>(
          std::span<const PackedAssignmentBatch<Word>>(batches).subspan(first, n), config_.group_width));
    }

    std::unique_ptr<RoundTrace> trace;
    if (observer_) {
      trace = std::make_unique<RoundTrace>();
      for (auto& q : pending)
        for (auto& s : q) trace->consumed.push_back(s);
      store_.for_each([&](ClauseSlot slot) {
        trace->clauses.emplace_back(store_.info(slot).engine_id, store_.copy_clause(slot));
      });
    }

    if (!groups.empty() && !store_.empty()) {
      result.clauses_tested = static_cast<std::uint64_t>(store_.size()) * result.assignments_consumed;
      auto tasks = plan_tasks();
      std::vector<TaskOutput> outputs(tasks.size());
      pool_.parallel_for(tasks.size(), [&](std::size_t i) {
        test_range(tasks[i], groups, batches, aggregates, outputs[i]);
      });
      ClauseSlot last{0, 0};
      bool any = false;
      for (auto& out : outputs) {
        result.aggregate_tests += out.aggregate_tests;
        result.aggregate_negative += out.aggregate_negative;
        result.lane_tests += out.lane_tests;
        for (auto& hit : out.hits) {
          auto& info = store_.info(hit.slot);
          // One bump per clause per round.
          if (!any || hit.slot.size != last.size || hit.slot.index != last.index) {
            info.activity += bump_;
            max_activity_ = std::max(max_activity_, info.activity);
            last = hit.slot;
            any = true;
          }
          Report r{hit.thread, store_.copy_clause(hit.slot), info.engine_id, std::move(hit.sequences)};
          if (trace) trace->reports.push_back(r);
          if (deliver(std::move(r))) ++result.reports;
        }
      }
    }

    decay_activity();
    if (store_.size() > config_.max_clauses) result.removed = reduce_store();

    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rounds_.fetch_add(1, std::memory_order_relaxed);
    assignments_consumed_.fetch_add(result.assignments_consumed, std::memory_order_relaxed);
    clauses_tested_.fetch_add(result.clauses_tested, std::memory_order_relaxed);
    aggregate_tests_.fetch_add(result.aggregate_tests, std::memory_order_relaxed);
    aggregate_negative_.fetch_add(result.aggregate_negative, std::memory_order_relaxed);
    lane_tests_.fetch_add(result.lane_tests, std::memory_order_relaxed);
    reports_delivered_.fetch_add(result.reports, std::memory_order_relaxed);
    store_size_.store(store_.size(), std::memory_order_relaxed);
    {
      std::lock_guard lock(busy_mutex_);
      busy_seconds_ += result.seconds;
    }
    if (observer_) observer_(*trace);
    return result;
  }

  // Removes the least active clauses among those inserted before the
  // previous reduce. Ties go to the older clause.
  std::size_t reduce_store() {
    struct Candidate {
      double activity;
      std::uint64_t id;
    };
    std::vector<Candidate> candidates;
    store_.for_each([&](ClauseSlot slot) {
      const auto& info = store_.info(slot);
      if (info.epoch != epoch_) candidates.push_back({info.activity, info.engine_id});
    });
    const auto target = static_cast<std::size_t>(
        static_cast<double>(store_.size()) * (1.0 - config_.reduce_keep_fraction));
    const std::size_t n = std::min(target, candidates.size());
    std::size_t removed = 0;
    if (n > 0) {
      std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n - 1), candidates.end(),
                       [](const Candidate& a, const Candidate& b) {
                         return a.activity != b.activity ? a.activity < b.activity : a.id < b.id;
                       });
      const Candidate cut = candidates[n - 1];
      // Everything ordered at or before the cut goes.
      removed = store_.remove_if([&](ClauseSlot slot) {
        const auto& info = store_.info(slot);
        if (info.epoch == epoch_) return false;
        return info.activity < cut.activity || (info.activity == cut.activity && info.engine_id <= cut.id);
      });
    }
    ++epoch_;
    reduces_.fetch_add(1, std::memory_order_relaxed);
    clauses_removed_.fetch_add(removed, std::memory_order_relaxed);
    store_size_.store(store_.size(), std::memory_order_relaxed);
    return removed;
  }

  // Engine worker body: runs rounds whenever work is pending until stopped.
  void run_worker(std::stop_token stop) {
    while (!stop.stop_requested()) {
      {
        std::unique_lock lock(inbox_mutex_);
        work_.wait(lock, stop, [&] { return has_pending_work_locked(); });
      }
      if (stop.stop_requested()) break;
      run_round();
    }
  }

  void set_round_observer(std::function<void(const RoundTrace&)> observer) { observer_ = std::move(observer); }

  const EngineClauseStore& store() const noexcept { return store_; }
  double bump_amount() const noexcept { return bump_; }

  EngineCounters counters() const {
    EngineCounters c;
    c.rounds = rounds_.load();
    c.clauses_exported = clauses_exported_.load();
    c.clauses_dropped = clauses_dropped_.load();
    c.assignments_accepted = assignments_accepted_.load();
    c.assignments_dropped = assignments_dropped_.load();
    c.assignments_consumed = assignments_consumed_.load();
    c.clauses_tested = clauses_tested_.load();
    c.aggregate_tests = aggregate_tests_.load();
    c.aggregate_negative = aggregate_negative_.load();
    c.lane_tests = lane_tests_.load();
    c.reports_delivered = reports_delivered_.load();
    c.reports_dropped = reports_dropped_.load();
    c.reports_drained = reports_drained_.load();
    c.reduces = reduces_.load();
    c.clauses_removed = clauses_removed_.load();
    c.store_size = store_size_.load();
    {
      std::lock_guard lock(busy_mutex_);
      c.busy_seconds = busy_seconds_;
    }
    return c;
  }

 private:
  struct PendingClause {
    Clause literals;
    std::uint32_t origin;
    std::uint64_t engine_id;
  };

  struct GroupInfo {
    std::size_t thread;
    std::vector<std::uint64_t> sequences;  // lane order
  };

  struct ReportQueue {
    std::mutex mutex;
    std::deque<Report> reports;
  };

  struct Task {
    std::uint32_t bucket;
    std::size_t begin;
    std::size_t end;
  };

  struct Hit {
    ClauseSlot slot;
    std::size_t thread;
    std::vector<std::uint64_t> sequences;
  };

  struct TaskOutput {
    std::vector<Hit> hits;
    std::uint64_t aggregate_tests = 0;
    std::uint64_t aggregate_negative = 0;
    std::uint64_t lane_tests = 0;
  };

  bool has_pending_work_locked() const {
    if (!exports_.empty()) return true;
    return std::any_of(snapshots_.begin(), snapshots_.end(), [](const auto& q) { return !q.empty(); });
  }

  std::vector<Task> plan_tasks() const {
    std::vector<Task> tasks;
    // Keep task boundaries on interleave chunks.
    const std::size_t grain =
        std::max<std::size_t>(EngineClauseStore::kStride,
                              config_.task_grain / EngineClauseStore::kStride * EngineClauseStore::kStride);
    for (const auto& b : store_.buckets())
      for (std::size_t begin = 0; begin < b.count(); begin += grain)
        tasks.push_back({b.clause_size(), begin, std::min(b.count(), begin + grain)});
    return tasks;
  }

  void test_range(const Task& task, const std::vector<GroupInfo>& groups,
                  const std::vector<PackedAssignmentBatch<Word>>& batches,
                  const std::vector<AggregateBatch<Word>>& aggregates, TaskOutput& out) const {
    const auto& bucket = store_.bucket(task.bucket);
    const std::span<const PackedAssignmentBatch<Word>> all_batches(batches);
    std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> per_thread;
    for (std::size_t i = task.begin; i < task.end; ++i) {
      const auto clause = bucket.clause(i);
      per_thread.clear();
      for (std::size_t k = 0; k < aggregates.size(); ++k) {
        const std::size_t first = k * config_.group_width;
        const auto& agg = aggregates[k];
        const Word positive = multi_trigger(
            agg, all_batches.subspan(first, agg.group_count()), clause, [&](std::size_t g, Word lanes) {
              const auto& group = groups[first + g];
              auto it = std::find_if(per_thread.begin(), per_thread.end(),
                                     [&](const auto& p) { return p.first == group.thread; });
              if (it == per_thread.end()) {
                per_thread.emplace_back(group.thread, std::vector<std::uint64_t>{});
                it = std::prev(per_thread.end());
              }
              for (Word rest = lanes; rest != 0; rest &= rest - 1)
                it->second.push_back(group.sequences[static_cast<std::size_t>(std::countr_zero(rest))]);
            });
        out.aggregate_tests += agg.group_count();
        out.aggregate_negative += agg.group_count() - static_cast<std::size_t>(std::popcount(positive));
        for (Word rest = positive; rest != 0; rest &= rest - 1)
          out.lane_tests += batches[first + static_cast<std::size_t>(std::countr_zero(rest))].lane_count();
      }
      for (auto& [thread, seqs] : per_thread) {
        std::sort(seqs.begin(), seqs.end());
        out.hits.push_back({ClauseSlot{task.bucket, static_cast<std::uint32_t>(i)}, thread, std::move(seqs)});
      }
    }
  }

  bool deliver(Report r) {
    auto& q = *report_queues_[r.thread];
    std::lock_guard lock(q.mutex);
    if (q.reports.size() >= config_.report_queue_capacity) {
      reports_dropped_.fetch_add(1, std::memory_order_relaxed);
      return false;
    }
    q.reports.push_back(std::move(r));
    return true;
  }

  // MiniSat-style: growing the bump is equivalent to decaying every activity.
  void decay_activity() {
    bump_ /= config_.activity_decay;
    if (bump_ > kRescaleLimit || max_activity_ > kRescaleLimit) {
      for (auto& b : store_.buckets())
        for (std::size_t i = 0; i < b.count(); ++i) b.info(i).activity *= 1.0 / kRescaleLimit;
      bump_ *= 1.0 / kRescaleLimit;
      max_activity_ *= 1.0 / kRescaleLimit;
    }
  }

  static constexpr double kRescaleLimit = 1e100;

  EngineConfig config_;
  WorkerPool pool_;

  std::mutex inbox_mutex_;
  std::condition_variable_any work_;
  std::vector<PendingClause> exports_;
  std::vector<std::deque<AssignmentSnapshot>> snapshots_;
  std::uint64_t next_sequence_ = 1;
  std::vector<std::unique_ptr<ReportQueue>> report_queues_;

  // Engine worker state.
  EngineClauseStore store_;
  double bump_ = 1.0;
  double max_activity_ = 0.0;
  std::uint32_t epoch_ = 0;
  std::function<void(const RoundTrace&)> observer_;

  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> rounds_{0}, clauses_exported_{0}, clauses_dropped_{0};
  std::atomic<std::uint64_t> assignments_accepted_{0}, assignments_dropped_{0}, assignments_consumed_{0};
  std::atomic<std::uint64_t> clauses_tested_{0}, aggregate_tests_{0}, aggregate_negative_{0}, lane_tests_{0};
  std::atomic<std::uint64_t> reports_delivered_{0}, reports_dropped_{0}, reports_drained_{0};
  std::atomic<std::uint64_t> reduces_{0}, clauses_removed_{0}, store_size_{0};
  mutable std::mutex busy_mutex_;
  double busy_seconds_ = 0.0;
};

}  // namespace trigsat
