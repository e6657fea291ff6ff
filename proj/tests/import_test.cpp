#include <gtest/gtest.h>

#include "oracles.hpp"
#include "trigsat/engine.hpp"
#include "trigsat/solver.hpp"

using namespace trigsat;
using namespace trigsat::testing;

namespace {

constexpr std::uint32_t A = 0, B = 1, C = 2, D = 3, E = 4;

// Five variables, one irrelevant binary clause so the search state is
// entirely driven by the script.
Formula five_vars() { return Formula{5, {{pos(D), pos(E)}, {neg(A), pos(B)}}}; }

void sweep(Solver& s) {
  ASSERT_FALSE(s.propagate().has_value());
  EXPECT_TRUE(s.check_watches());
  EXPECT_TRUE(s.check_reasons());
}

TEST(Import, TwoUndefLiteralsAttachQuietly) {
  Solver s(five_vars());
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  const auto before = std::vector<Lit>(s.trail().begin(), s.trail().end());
  const Clause c{pos(C), pos(E), neg(A)};
  EXPECT_EQ(s.import_clause(c), ImportOutcome::AttachedQuiet);
  EXPECT_EQ(std::vector<Lit>(s.trail().begin(), s.trail().end()), before);
  EXPECT_TRUE(s.holds(c));
  sweep(s);
}

TEST(Import, UnitAtCurrentLevelImpliesLiteral) {
  Solver s(five_vars());
  s.new_decision(pos(A));  // implies B at level 1
  ASSERT_FALSE(s.propagate());
  ASSERT_EQ(s.level(Var{B}), 1);
  const Clause c{neg(A), neg(B), pos(C)};
  EXPECT_EQ(s.import_clause(c), ImportOutcome::AttachedImplied);
  EXPECT_EQ(s.value(Var{C}), T);
  EXPECT_EQ(s.level(Var{C}), 1);
  EXPECT_EQ(s.reason(Var{C}), s.find_clause(c));
  sweep(s);
}

TEST(Import, UnitBelowCurrentLevelBacktracks) {
  Solver s(five_vars());
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  s.new_decision(pos(D));
  ASSERT_FALSE(s.propagate());
  // C Undef, ~A False at 1: implied at level 1.
  EXPECT_EQ(s.import_clause(Clause{neg(A), pos(C)}), ImportOutcome::AttachedImplied);
  EXPECT_EQ(s.decision_level(), 1);
  EXPECT_EQ(s.value(Var{C}), T);
  EXPECT_EQ(s.level(Var{C}), 1);
  sweep(s);
}

TEST(Import, TrueLiteralAboveFalseLevelIsReimplied) {
  Solver s(five_vars());
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  s.new_decision(pos(C));
  ASSERT_FALSE(s.propagate());
  EXPECT_EQ(s.import_clause(Clause{neg(A), pos(C)}), ImportOutcome::AttachedAfterBacktrack);
  EXPECT_EQ(s.decision_level(), 1);
  EXPECT_EQ(s.value(Var{C}), T);
  EXPECT_EQ(s.level(Var{C}), 1);
  sweep(s);
}

TEST(Import, TrueLiteralAtOrBelowFalseLevelAttachesQuietly) {
  Solver s(five_vars());
  s.new_decision(pos(C));
  ASSERT_FALSE(s.propagate());
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  const auto level_before = s.decision_level();
  EXPECT_EQ(s.import_clause(Clause{neg(A), pos(C)}), ImportOutcome::AttachedQuiet);
  EXPECT_EQ(s.decision_level(), level_before);
  sweep(s);
}

TEST(Import, AllFalseDifferentLevelsBacktracksAndImplies) {
  Solver s(Formula{5, {{pos(D), pos(E)}}});
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  s.new_decision(pos(B));
  ASSERT_FALSE(s.propagate());
  const Clause c{neg(A), neg(B)};
  EXPECT_EQ(s.import_clause(c), ImportOutcome::AttachedAfterBacktrack);
  EXPECT_EQ(s.decision_level(), 1);
  EXPECT_EQ(s.value(Var{B}), F);
  EXPECT_EQ(s.level(Var{B}), 1);
  EXPECT_EQ(s.reason(Var{B}), s.find_clause(c));
  sweep(s);
}

TEST(Import, AllFalseSameTopLevelAnalysesConflict) {
  Solver s(five_vars());
  s.new_decision(pos(A));  // A, B at level 1
  ASSERT_FALSE(s.propagate());
  const auto conflicts = s.stats().conflicts;
  EXPECT_EQ(s.import_clause(Clause{neg(A), neg(B)}), ImportOutcome::Conflicting);
  EXPECT_EQ(s.stats().conflicts, conflicts + 1);
  EXPECT_EQ(s.decision_level(), 0);
  EXPECT_EQ(s.value(Var{A}), F);
  sweep(s);
  EXPECT_EQ(s.solve(), SolveStatus::Sat);
  EXPECT_TRUE(verify_model(five_vars(), s.model()));
}

TEST(Import, AllFalseAtLevelZeroIsUnsat) {
  Solver s(Formula{2, {{pos(A)}, {pos(B)}}});
  EXPECT_EQ(s.import_clause(Clause{neg(A), neg(B)}), ImportOutcome::Conflicting);
  EXPECT_FALSE(s.ok());
  EXPECT_EQ(s.solve(), SolveStatus::Unsat);
}

TEST(Import, UnitClauses) {
  Solver s(five_vars());
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  EXPECT_EQ(s.import_clause(Clause{pos(C)}), ImportOutcome::AttachedAfterBacktrack);
  EXPECT_EQ(s.decision_level(), 0);
  EXPECT_EQ(s.value(Var{C}), T);
  EXPECT_EQ(s.import_clause(Clause{pos(C)}), ImportOutcome::DuplicateSkipped);
  EXPECT_EQ(s.import_clause(Clause{pos(D)}), ImportOutcome::AttachedImplied);
  sweep(s);
  EXPECT_EQ(s.import_clause(Clause{neg(D)}), ImportOutcome::Conflicting);
  EXPECT_FALSE(s.ok());
}

TEST(Import, DuplicatesAreSkipped) {
  Solver s(five_vars());
  EXPECT_EQ(s.import_clause(Clause{pos(B), neg(A)}), ImportOutcome::DuplicateSkipped);
  EXPECT_EQ(s.import_clause(Clause{pos(C), pos(A), pos(E)}), ImportOutcome::AttachedQuiet);
  EXPECT_EQ(s.import_clause(Clause{pos(E), pos(C), pos(A)}), ImportOutcome::DuplicateSkipped);
  EXPECT_EQ(s.stats().import_count(ImportOutcome::DuplicateSkipped), 2u);
}

TEST(Import, ForgottenClauseIsImportedAgain) {
  Engine e(1);
  const Formula f{5, {{neg(A), pos(B)}, {neg(B), neg(D), neg(E)}, {neg(B), neg(D), pos(E)}}};
  Solver s(f, 0, {}, &e);
  s.new_decision(pos(A));
  ASSERT_FALSE(s.propagate());
  s.new_decision(pos(D));
  const auto conflict = s.propagate();
  ASSERT_TRUE(conflict);
  ASSERT_TRUE(s.resolve_conflict(*conflict));
  const Clause learned{neg(D), neg(B)};
  ASSERT_TRUE(s.holds(learned));
  e.run_round();  // stores the export and consumes the snapshot
  e.drain_reports(0);

  s.cancel_until(0);
  ASSERT_TRUE(s.forget_clause(learned));
  EXPECT_FALSE(s.holds(learned));
  ASSERT_FALSE(s.propagate());

  e.submit_assignment({0, make_assignment({T, T, U, T, U}), 0});
  e.run_round();
  const auto reports = e.drain_reports(0);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].literals, learned);
  EXPECT_NE(s.import_clause(reports[0].literals), ImportOutcome::DuplicateSkipped);
  EXPECT_TRUE(s.holds(learned));
  sweep(s);
}

TEST(Import, ImportReportsDrainsEngine) {
  Engine e(1);
  Solver s(five_vars(), 0, {}, &e);
  e.add_clause(Clause{pos(C), pos(E)}, 0);
  e.submit_assignment({0, make_assignment({U, U, F, U, U}), 0});
  e.run_round();
  EXPECT_EQ(s.import_reports(), 1u);
  EXPECT_EQ(s.stats().reports_received, 1u);
  EXPECT_TRUE(s.holds(Clause{pos(C), pos(E)}));
}

}  // namespace
