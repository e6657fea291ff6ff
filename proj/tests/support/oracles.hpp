#pragma once

// Test-only reference procedures. None of these share code with the bitwise
// kernels or the CDCL search they are used to check.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "trigsat/core.hpp"

namespace trigsat::testing {

inline Lit pos(std::uint32_t v) { return Lit::positive(Var{v}); }
inline Lit neg(std::uint32_t v) { return Lit::negative(Var{v}); }

inline Assignment make_assignment(std::initializer_list<TruthValue> values) { return Assignment(values); }

constexpr TruthValue T = TruthValue::True;
constexpr TruthValue F = TruthValue::False;
constexpr TruthValue U = TruthValue::Undef;

// Plain enumeration of all 2^n total assignments. Only for small n.
inline std::optional<Assignment> enumerate_sat(const Formula& f) {
  const std::size_t n = f.num_vars;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    bool all = true;
    for (const auto& c : f.clauses) {
      bool sat = false;
      for (Lit l : c) {
        const bool v = (bits >> l.var().index) & 1;
        if (v != l.is_negative()) {
          sat = true;
          break;
        }
      }
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) {
      Assignment a(n);
      for (std::uint32_t v = 0; v < n; ++v) a.set(Var{v}, ((bits >> v) & 1) ? TruthValue::True : TruthValue::False);
      return a;
    }
  }
  return std::nullopt;
}

// Exhaustive search over variables in index order that abandons a branch as
// soon as a clause whose variables are all assigned is false. Complete, no
// propagation and no learning.
inline std::optional<Assignment> backtrack_sat(const Formula& f) {
  const std::size_t n = f.num_vars;
  for (const auto& c : f.clauses)
    if (c.empty()) return std::nullopt;
  std::vector<std::vector<const Clause*>> closing(n);
  for (const auto& c : f.clauses) {
    std::uint32_t top = 0;
    for (Lit l : c) top = std::max(top, l.var().index);
    closing[top].push_back(&c);
  }
  std::vector<signed char> value(n, -1);
  auto falsified = [&](const Clause& c) {
    return std::all_of(c.begin(), c.end(), [&](Lit l) { return value[l.var().index] == (l.is_negative() ? 1 : 0); });
  };
  std::vector<int> next(n + 1, 0);
  std::size_t depth = 0;
  if (n == 0) return Assignment(0);
  for (;;) {
    if (next[depth] >= 2) {
      value[depth] = -1;
      next[depth] = 0;
      if (depth == 0) return std::nullopt;
      --depth;
      continue;
    }
    value[depth] = static_cast<signed char>(next[depth]++);
    const bool ok = std::none_of(closing[depth].begin(), closing[depth].end(), [&](const Clause* c) { return falsified(*c); });
    if (!ok) continue;
    if (depth + 1 == n) {
      Assignment a(n);
      for (std::uint32_t v = 0; v < n; ++v) a.set(Var{v}, value[v] ? TruthValue::True : TruthValue::False);
      return a;
    }
    ++depth;
  }
}

inline Formula random_kcnf(std::size_t num_vars, std::size_t num_clauses, std::size_t k, std::mt19937_64& rng) {
  Formula f;
  f.num_vars = num_vars;
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(num_vars - 1));
  std::bernoulli_distribution sign(0.5);
  for (std::size_t i = 0; i < num_clauses; ++i) {
    Clause c;
    while (c.size() < k) {
      const auto v = pick(rng);
      if (std::any_of(c.begin(), c.end(), [&](Lit l) { return l.var().index == v; })) continue;
      c.push_back(Lit(Var{v}, sign(rng)));
    }
    f.clauses.push_back(std::move(c));
  }
  return f;
}

// p pigeons into h holes; unsatisfiable when p > h.
inline Formula pigeonhole(std::size_t p, std::size_t h) {
  Formula f;
  f.num_vars = p * h;
  auto x = [&](std::size_t i, std::size_t j) { return pos(static_cast<std::uint32_t>(i * h + j)); };
  for (std::size_t i = 0; i < p; ++i) {
    Clause c;
    for (std::size_t j = 0; j < h; ++j) c.push_back(x(i, j));
    f.clauses.push_back(c);
  }
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) f.clauses.push_back({~x(a, j), ~x(b, j)});
  return f;
}

inline Assignment random_assignment(std::size_t num_vars, std::mt19937_64& rng, double p_undef = 1.0 / 3) {
  Assignment a(num_vars);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint32_t v = 0; v < num_vars; ++v) {
    const double r = u(rng);
    if (r < p_undef) continue;
    a.set(Var{v}, r < p_undef + (1 - p_undef) / 2 ? TruthValue::True : TruthValue::False);
  }
  return a;
}

// A copy of `base` with each variable re-drawn with probability `p`.
inline Assignment perturb(const Assignment& base, double p, std::mt19937_64& rng) {
  Assignment a = base;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> w(0, 2);
  for (std::uint32_t v = 0; v < base.num_vars(); ++v)
    if (u(rng) < p) a.set(Var{v}, static_cast<TruthValue>(w(rng)));
  return a;
}

inline Clause random_clause(std::size_t num_vars, std::size_t size, std::mt19937_64& rng) {
  std::vector<std::uint32_t> vars(num_vars);
  for (std::uint32_t v = 0; v < num_vars; ++v) vars[v] = v;
  std::shuffle(vars.begin(), vars.end(), rng);
  std::bernoulli_distribution sign(0.5);
  Clause c;
  for (std::size_t i = 0; i < size; ++i) c.push_back(Lit(Var{vars[i]}, sign(rng)));
  return c;
}

// Does the clause trigger under the definition, by counting literal values.
// Independent restatement used to cross-check clause_status.
inline bool triggers_by_count(const Assignment& a, const Clause& c) {
  std::size_t num_false = 0;
  for (Lit l : c) {
    const TruthValue w = eval_literal(a, l);
    if (w == TruthValue::True) return false;
    if (w == TruthValue::False) ++num_false;
  }
  return num_false + 1 >= c.size();
}

}  // namespace trigsat::testing
