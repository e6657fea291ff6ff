#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>

#include "oracles.hpp"
#include "trigsat/clause_store.hpp"
#include "trigsat/worker_pool.hpp"

using namespace trigsat;
using namespace trigsat::testing;

namespace {

TEST(ClauseStore, RoundTripAcrossChunks) {
  std::mt19937_64 rng(1);
  EngineClauseStore store;
  std::map<std::uint64_t, Clause> inserted;
  for (std::uint64_t id = 1; id <= 1000; ++id) {
    auto c = random_clause(20, 1 + rng() % 9, rng);
    store.insert(c, {id, 0.0, 0, 0});
    inserted[id] = c;
  }
  EXPECT_EQ(store.size(), inserted.size());
  std::size_t seen = 0;
  store.for_each([&](ClauseSlot slot) {
    const auto& info = store.info(slot);
    EXPECT_EQ(store.copy_clause(slot), inserted.at(info.engine_id));
    EXPECT_EQ(slot.size, inserted.at(info.engine_id).size());
    ++seen;
  });
  EXPECT_EQ(seen, inserted.size());
}

TEST(ClauseStore, StridedViewMatchesCopy) {
  EngineClauseStore store;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) store.insert(random_clause(10, 4, rng), {});
  const auto& b = store.bucket(4);
  for (std::size_t i = 0; i < b.count(); ++i) {
    Clause via_view;
    for (Lit l : b.clause(i)) via_view.push_back(l);
    EXPECT_EQ(via_view, b.copy_clause(i));
  }
}

TEST(ClauseStore, RemoveIfKeepsSurvivorsIntact) {
  std::mt19937_64 rng(3);
  EngineClauseStore store;
  std::map<std::uint64_t, Clause> inserted;
  for (std::uint64_t id = 1; id <= 300; ++id) {
    auto c = random_clause(12, 1 + rng() % 5, rng);
    store.insert(c, {id, 0.0, 0, 0});
    inserted[id] = c;
  }
  const auto removed = store.remove_if([&](ClauseSlot s) { return store.info(s).engine_id % 3 == 0; });
  EXPECT_EQ(removed, 100u);
  EXPECT_EQ(store.size(), 200u);
  store.for_each([&](ClauseSlot slot) {
    const auto id = store.info(slot).engine_id;
    EXPECT_NE(id % 3, 0u);
    EXPECT_EQ(store.copy_clause(slot), inserted.at(id));
  });
}

TEST(ClauseStore, RejectsEmptyClause) {
  EngineClauseStore store;
  EXPECT_THROW(store.insert(Clause{}, {}), std::invalid_argument);
}

TEST(WorkerPool, VisitsEveryIndexOnce) {
  for (std::size_t threads : {1u, 3u}) {
    WorkerPool pool(threads);
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<std::atomic<int>> hits(257);
      pool.parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
      for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
  }
}

}  // namespace
