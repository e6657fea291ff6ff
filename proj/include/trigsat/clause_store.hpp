#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <ranges>
#include <span>
#include <stdexcept>
#include <vector>

#include "trigsat/core.hpp"

namespace trigsat {

struct StoredClauseInfo {
  std::uint64_t engine_id = 0;
  double activity = 0.0;
  std::uint32_t origin = 0;
  // Value of the store's reduce counter when the clause was inserted.
  std::uint32_t epoch = 0;
};

// Location of a clause inside the store. Invalidated by compaction.
struct ClauseSlot {
  std::uint32_t size = 0;
  std::uint32_t index = 0;
};

// Clauses grouped by size. Inside a bucket, clauses are taken kStride at a
// time and their literals interleaved: literal j of the k-th clause of a
// chunk sits at chunk_base + j * kStride + k. A worker that walks a chunk
// literal position by literal position touches contiguous memory.
class EngineClauseStore {
 public:
  static constexpr std::size_t kStride = 32;

  class Bucket {
   public:
    explicit Bucket(std::uint32_t clause_size) : clause_size_(clause_size) {}

    std::uint32_t clause_size() const noexcept { return clause_size_; }
    std::size_t count() const noexcept { return info_.size(); }
    std::size_t chunk_count() const noexcept { return (count() + kStride - 1) / kStride; }

    Lit literal(std::size_t index, std::size_t j) const noexcept { return lits_[offset(index, j)]; }

    // Strided view over the literals of one clause.
    auto clause(std::size_t index) const {
      const Lit* base = lits_.data() + offset(index, 0);
      return std::views::iota(std::size_t{0}, std::size_t{clause_size_}) |
             std::views::transform([base](std::size_t j) { return base[j * kStride]; });
    }

    Clause copy_clause(std::size_t index) const {
      Clause out;
      out.reserve(clause_size_);
      for (Lit l : clause(index)) out.push_back(l);
      return out;
    }

    StoredClauseInfo& info(std::size_t index) noexcept { return info_[index]; }
    const StoredClauseInfo& info(std::size_t index) const noexcept { return info_[index]; }

    void push(std::span<const Lit> lits, const StoredClauseInfo& meta) {
      const std::size_t index = count();
      if (index % kStride == 0) lits_.resize(lits_.size() + kStride * clause_size_);
      info_.push_back(meta);
      for (std::size_t j = 0; j < clause_size_; ++j) lits_[offset(index, j)] = lits[j];
    }

    // Keeps clauses for which keep(index) is true, preserving their order.
    template <typename Pred>
    std::size_t compact(Pred&& keep) {
      Bucket out(clause_size_);
      std::vector<Lit> buf(clause_size_);
      for (std::size_t i = 0; i < count(); ++i) {
        if (!keep(i)) continue;
        for (std::size_t j = 0; j < clause_size_; ++j) buf[j] = literal(i, j);
        out.push(buf, info_[i]);
      }
      const std::size_t removed = count() - out.count();
      *this = std::move(out);
      return removed;
    }

   private:
    std::size_t offset(std::size_t index, std::size_t j) const noexcept {
      return (index / kStride) * kStride * clause_size_ + j * kStride + index % kStride;
    }

    std::uint32_t clause_size_;
    std::vector<Lit> lits_;
    std::vector<StoredClauseInfo> info_;
  };

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  ClauseSlot insert(std::span<const Lit> lits, const StoredClauseInfo& meta) {
    if (lits.empty()) throw std::invalid_argument("cannot store the empty clause");
    const auto s = static_cast<std::uint32_t>(lits.size());
    while (buckets_.size() <= s) buckets_.emplace_back(static_cast<std::uint32_t>(buckets_.size()));
    auto& b = buckets_[s];
    b.push(lits, meta);
    ++size_;
    return {s, static_cast<std::uint32_t>(b.count() - 1)};
  }

  std::span<Bucket> buckets() noexcept { return buckets_; }
  std::span<const Bucket> buckets() const noexcept { return buckets_; }

  Bucket& bucket(std::uint32_t size) { return buckets_.at(size); }
  const Bucket& bucket(std::uint32_t size) const { return buckets_.at(size); }

  StoredClauseInfo& info(ClauseSlot slot) { return buckets_.at(slot.size).info(slot.index); }
  const StoredClauseInfo& info(ClauseSlot slot) const { return buckets_.at(slot.size).info(slot.index); }
  Clause copy_clause(ClauseSlot slot) const { return buckets_.at(slot.size).copy_clause(slot.index); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& b : buckets_)
      for (std::size_t i = 0; i < b.count(); ++i) fn(ClauseSlot{b.clause_size(), static_cast<std::uint32_t>(i)});
  }

  // Removes every clause for which remove(slot) is true. Returns the count.
  template <typename Pred>
  std::size_t remove_if(Pred&& remove) {
    std::size_t removed = 0;
    for (auto& b : buckets_) {
      const auto s = b.clause_size();
      removed += b.compact([&](std::size_t i) { return !remove(ClauseSlot{s, static_cast<std::uint32_t>(i)}); });
    }
    size_ -= removed;
    return removed;
  }

 private:
  std::vector<Bucket> buckets_;
  std::size_t size_ = 0;
};

}  // namespace trigsat
