#pragma once

// Bit-parallel trigger tests.
//
// A PackedAssignmentBatch holds up to W assignments (one per bit "lane") as
// two words per variable, isTrue and isSet. Undef is always encoded with the
// isTrue bit cleared. An AggregateBatch holds up to W assignment groups, each
// summarised per variable by the set of values the variable takes across the
// group (canBeTrue, canBeFalse, canBeUndef). A clause triggers on an
// aggregate whenever it triggers on at least one member assignment, so the
// aggregate test is a filter with false positives but no false negatives.

#include <bit>
#include <concepts>
#include <cstdint>
#include <limits>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trigsat/core.hpp"

namespace trigsat {

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

template <std::unsigned_integral Word>
constexpr std::size_t word_bits = std::numeric_limits<Word>::digits;

template <std::unsigned_integral Word>
constexpr Word low_bits(std::size_t count) noexcept {
  return count >= word_bits<Word> ? ~Word{0} : static_cast<Word>((Word{1} << count) - 1);
}

// Value bits of one literal across all lanes of a batch.
template <std::unsigned_integral Word>
struct LiteralBits {
  Word is_set = 0;
  Word is_false = 0;
};

template <std::unsigned_integral Word = std::uint32_t>
class PackedAssignmentBatch {
 public:
  PackedAssignmentBatch() = default;
  PackedAssignmentBatch(std::size_t num_vars, std::size_t lane_width)
      : lane_width_(lane_width), is_true_(num_vars, 0), is_set_(num_vars, 0) {
    if (lane_width == 0 || lane_width > word_bits<Word>)
      throw std::invalid_argument("lane width must be in 1.." + std::to_string(word_bits<Word>));
  }

  std::size_t num_vars() const noexcept { return is_set_.size(); }
  std::size_t lane_width() const noexcept { return lane_width_; }
  std::size_t lane_count() const noexcept { return lane_count_; }
  Word lane_mask() const noexcept { return low_bits<Word>(lane_count_); }

  Word is_true(Var v) const noexcept { return v.index < is_true_.size() ? is_true_[v.index] : 0; }
  Word is_set(Var v) const noexcept { return v.index < is_set_.size() ? is_set_[v.index] : 0; }

  LiteralBits<Word> bits(Lit l) const noexcept {
    const Word set = is_set(l.var());
    const Word t = is_true(l.var());
    return {set, l.is_negative() ? (set & t) : (set & ~t)};
  }

  // Appends one lane. Returns its lane index.
  std::size_t push(const Assignment& a) {
    if (lane_count_ >= lane_width_)
      throw CapacityError("assignment batch is full (" + std::to_string(lane_width_) + " lanes)");
    if (a.num_vars() > num_vars()) {
      is_true_.resize(a.num_vars(), 0);
      is_set_.resize(a.num_vars(), 0);
    }
    const Word bit = Word{1} << lane_count_;
    const auto values = a.values();
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (values[v] == TruthValue::Undef) continue;
      is_set_[v] |= bit;
      if (values[v] == TruthValue::True) is_true_[v] |= bit;
    }
    return lane_count_++;
  }

  Assignment unpack(std::size_t lane) const {
    Assignment a(num_vars());
    const Word bit = Word{1} << lane;
    for (std::size_t v = 0; v < num_vars(); ++v) {
      if (!(is_set_[v] & bit)) continue;
      a.set(Var{static_cast<std::uint32_t>(v)}, (is_true_[v] & bit) ? TruthValue::True : TruthValue::False);
    }
    return a;
  }

 private:
  std::size_t lane_width_ = word_bits<Word>;
  std::size_t lane_count_ = 0;
  std::vector<Word> is_true_;
  std::vector<Word> is_set_;
};

template <std::unsigned_integral Word = std::uint32_t>
PackedAssignmentBatch<Word> pack_assignments(std::span<const Assignment> assignments,
                                             std::size_t lane_width = 32) {
  if (assignments.size() > lane_width)
    throw CapacityError("cannot pack " + std::to_string(assignments.size()) + " assignments into " +
                        std::to_string(lane_width) + " lanes");
  std::size_t num_vars = 0;
  for (const auto& a : assignments) num_vars = std::max(num_vars, a.num_vars());
  PackedAssignmentBatch<Word> batch(num_vars, lane_width);
  for (const auto& a : assignments) batch.push(a);
  return batch;
}

template <typename R>
concept LiteralRange = std::ranges::input_range<R> && std::convertible_to<std::ranges::range_value_t<R>, Lit>;

// Bit i of the result is set iff the clause triggers on lane i.
template <std::unsigned_integral Word, LiteralRange Lits>
Word assignment_trigger(const PackedAssignmentBatch<Word>& batch, Lits&& clause) {
  Word all_false = ~Word{0};
  Word one_undef = 0;
  for (Lit l : clause) {
    const auto b = batch.bits(l);
    one_undef = (all_false & ~b.is_set) | (one_undef & b.is_false);
    all_false &= b.is_false;
  }
  // Pad lanes are all-Undef, so a unit clause would fire on them.
  return (all_false | one_undef) & batch.lane_mask();
}

// Subset of {T, F, U}.
struct ValueSet {
  static constexpr std::uint8_t kTrue = 1, kFalse = 2, kUndef = 4;
  std::uint8_t bits = 0;

  constexpr bool has(TruthValue w) const noexcept { return bits & flag(w); }
  constexpr void add(TruthValue w) noexcept { bits |= flag(w); }
  constexpr ValueSet negated() const noexcept {
    ValueSet out{static_cast<std::uint8_t>(bits & kUndef)};
    if (bits & kTrue) out.bits |= kFalse;
    if (bits & kFalse) out.bits |= kTrue;
    return out;
  }
  constexpr bool operator==(const ValueSet&) const = default;

  static constexpr std::uint8_t flag(TruthValue w) noexcept {
    return w == TruthValue::True ? kTrue : (w == TruthValue::False ? kFalse : kUndef);
  }
};

// The aggregate of a whole batch at one variable. An empty batch aggregates
// to {U}.
template <std::unsigned_integral Word>
ValueSet aggregate_value(const PackedAssignmentBatch<Word>& batch, Var v) {
  const Word mask = batch.lane_mask();
  if (mask == 0) return ValueSet{ValueSet::kUndef};
  const Word set = batch.is_set(v) & mask;
  const Word t = batch.is_true(v) & mask;
  ValueSet g;
  if (t != 0) g.bits |= ValueSet::kTrue;
  if ((set & ~t) != 0) g.bits |= ValueSet::kFalse;
  if ((~set & mask) != 0) g.bits |= ValueSet::kUndef;
  return g;
}

template <std::unsigned_integral Word = std::uint32_t>
class AggregateBatch {
 public:
  AggregateBatch() = default;
  AggregateBatch(std::size_t num_vars, std::size_t group_width)
      : group_width_(group_width), can_true_(num_vars, 0), can_false_(num_vars, 0), can_undef_(num_vars, 0) {
    if (group_width == 0 || group_width > word_bits<Word>)
      throw std::invalid_argument("group width must be in 1.." + std::to_string(word_bits<Word>));
  }

  std::size_t num_vars() const noexcept { return can_true_.size(); }
  std::size_t group_width() const noexcept { return group_width_; }
  std::size_t group_count() const noexcept { return group_count_; }
  Word group_mask() const noexcept { return low_bits<Word>(group_count_); }

  Word can_be_true(Var v) const noexcept { return read(can_true_, v); }
  Word can_be_false(Var v) const noexcept { return read(can_false_, v); }
  // Variables beyond the packed range were never assigned in any group.
  Word can_be_undef(Var v) const noexcept { return v.index < can_undef_.size() ? can_undef_[v.index] : group_mask(); }

  Word can_be_false(Lit l) const noexcept {
    return l.is_negative() ? can_be_true(l.var()) : can_be_false(l.var());
  }
  Word can_be_undef(Lit l) const noexcept { return can_be_undef(l.var()); }

  ValueSet group_value(std::size_t group, Var v) const noexcept {
    const Word bit = Word{1} << group;
    ValueSet g;
    if (can_be_true(v) & bit) g.bits |= ValueSet::kTrue;
    if (can_be_false(v) & bit) g.bits |= ValueSet::kFalse;
    if (can_be_undef(v) & bit) g.bits |= ValueSet::kUndef;
    return g;
  }
  // G(l): the aggregate read through a literal.
  ValueSet group_value(std::size_t group, Lit l) const noexcept {
    const ValueSet g = group_value(group, l.var());
    return l.is_negative() ? g.negated() : g;
  }

  template <std::unsigned_integral LaneWord>
  std::size_t push(const PackedAssignmentBatch<LaneWord>& batch) {
    if (group_count_ >= group_width_)
      throw CapacityError("aggregate batch is full (" + std::to_string(group_width_) + " groups)");
    if (batch.num_vars() > num_vars()) {
      can_true_.resize(batch.num_vars(), 0);
      can_false_.resize(batch.num_vars(), 0);
      // Groups pushed so far never assigned these variables.
      can_undef_.resize(batch.num_vars(), group_mask());
    }
    const Word bit = Word{1} << group_count_;
    for (std::size_t v = 0; v < num_vars(); ++v) {
      const ValueSet g = aggregate_value(batch, Var{static_cast<std::uint32_t>(v)});
      if (g.bits & ValueSet::kTrue) can_true_[v] |= bit;
      if (g.bits & ValueSet::kFalse) can_false_[v] |= bit;
      if (g.bits & ValueSet::kUndef) can_undef_[v] |= bit;
    }
    return group_count_++;
  }

 private:
  Word read(const std::vector<Word>& words, Var v) const noexcept {
    return v.index < words.size() ? words[v.index] : 0;
  }

  std::size_t group_width_ = word_bits<Word>;
  std::size_t group_count_ = 0;
  std::vector<Word> can_true_;
  std::vector<Word> can_false_;
  std::vector<Word> can_undef_;
};

template <std::unsigned_integral Word = std::uint32_t, std::unsigned_integral LaneWord>
AggregateBatch<Word> build_aggregate_batch(std::span<const PackedAssignmentBatch<LaneWord>> batches,
                                           std::size_t group_width = 32) {
  if (batches.size() > group_width)
    throw CapacityError("cannot aggregate " + std::to_string(batches.size()) + " groups into width " +
                        std::to_string(group_width));
  std::size_t num_vars = 0;
  for (const auto& b : batches) num_vars = std::max(num_vars, b.num_vars());
  AggregateBatch<Word> out(num_vars, group_width);
  for (const auto& b : batches) out.push(b);
  return out;
}

// Bit i of the result is set iff the clause triggers on aggregate i.
template <std::unsigned_integral Word, LiteralRange Lits>
Word aggregate_trigger(const AggregateBatch<Word>& g, Lits&& clause) {
  Word all_false = ~Word{0};
  Word one_undef = 0;
  for (Lit l : clause) {
    const Word can_false = g.can_be_false(l);
    one_undef = (all_false & g.can_be_undef(l)) | (one_undef & can_false);
    all_false &= can_false;
  }
  return (all_false | one_undef) & g.group_mask();
}

// Group-testing cascade: lanes are only examined in groups whose aggregate
// tests positive. report(group, lane_mask) is called once per group with at
// least one triggering lane. Returns the aggregate result.
template <std::unsigned_integral Word, std::unsigned_integral LaneWord, LiteralRange Lits, typename Report>
  requires std::invocable<Report&, std::size_t, LaneWord>
Word multi_trigger(const AggregateBatch<Word>& g, std::span<const PackedAssignmentBatch<LaneWord>> groups,
                   const Lits& clause, Report&& report) {
  const Word positive = aggregate_trigger(g, clause);
  for (Word rest = positive; rest != 0; rest &= rest - 1) {
    const auto group = static_cast<std::size_t>(std::countr_zero(rest));
    const LaneWord lanes = assignment_trigger(groups[group], clause);
    if (lanes != 0) report(group, lanes);
  }
  return positive;
}

}  // namespace trigsat
