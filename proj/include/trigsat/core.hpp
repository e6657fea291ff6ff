#pragma once

// Logical primitives shared by every other component: truth values,
// variables, literals, clauses, dense assignments and formulas, together with
// the reference (non-bitwise) trigger test.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace trigsat {

enum class TruthValue : std::uint8_t { False = 0, True = 1, Undef = 2 };

constexpr TruthValue operator!(TruthValue w) noexcept {
  switch (w) {
    case TruthValue::True: return TruthValue::False;
    case TruthValue::False: return TruthValue::True;
    default: return TruthValue::Undef;
  }
}

constexpr char to_char(TruthValue w) noexcept {
  return w == TruthValue::True ? 'T' : (w == TruthValue::False ? 'F' : 'U');
}

struct Var {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const Var&) const = default;
};

// Literals are encoded MiniSat-style: code = 2 * var + (negative ? 1 : 0), so
// that literal codes index watch lists directly.
class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(Var v, bool negative) noexcept : code_(2 * v.index + (negative ? 1u : 0u)) {}

  static constexpr Lit positive(Var v) noexcept { return Lit(v, false); }
  static constexpr Lit negative(Var v) noexcept { return Lit(v, true); }
  static constexpr Lit from_code(std::uint32_t code) noexcept {
    Lit l;
    l.code_ = code;
    return l;
  }
  // DIMACS convention: 1-based, sign gives polarity. d must be nonzero.
  static constexpr Lit from_dimacs(long d) noexcept {
    return d > 0 ? positive(Var{static_cast<std::uint32_t>(d - 1)})
                 : negative(Var{static_cast<std::uint32_t>(-d - 1)});
  }

  constexpr Var var() const noexcept { return Var{code_ >> 1}; }
  constexpr bool is_negative() const noexcept { return (code_ & 1u) != 0; }
  constexpr std::uint32_t code() const noexcept { return code_; }
  constexpr long to_dimacs() const noexcept {
    const long v = static_cast<long>(var().index) + 1;
    return is_negative() ? -v : v;
  }

  constexpr Lit operator~() const noexcept { return from_code(code_ ^ 1u); }
  constexpr auto operator<=>(const Lit&) const = default;

 private:
  std::uint32_t code_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Lit l) { return os << l.to_dimacs(); }

using Clause = std::vector<Lit>;

inline std::string to_string(std::span<const Lit> c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(c[i].to_dimacs());
  }
  return out + ")";
}

// A total map from the variables 0..size-1 to truth values. Unmentioned
// variables are Undef.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t num_vars) : values_(num_vars, TruthValue::Undef) {}
  Assignment(std::initializer_list<TruthValue> values) : values_(values) {}

  std::size_t num_vars() const noexcept { return values_.size(); }
  void resize(std::size_t num_vars) { values_.resize(num_vars, TruthValue::Undef); }

  TruthValue operator[](Var v) const noexcept {
    return v.index < values_.size() ? values_[v.index] : TruthValue::Undef;
  }
  void set(Var v, TruthValue w) {
    if (v.index >= values_.size()) resize(v.index + 1);
    values_[v.index] = w;
  }
  void assign(Lit l) { set(l.var(), l.is_negative() ? TruthValue::False : TruthValue::True); }

  std::span<const TruthValue> values() const noexcept { return values_; }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<TruthValue> values_;
};

struct Formula {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;
};

constexpr TruthValue eval_literal(TruthValue var_value, Lit l) noexcept {
  return l.is_negative() ? !var_value : var_value;
}

inline TruthValue eval_literal(const Assignment& a, Lit l) noexcept {
  return eval_literal(a[l.var()], l);
}

enum class StatusKind : std::uint8_t { Satisfied, Conflicting, Unit, Unresolved };

struct ClauseStatus {
  StatusKind kind = StatusKind::Unresolved;
  Lit unit;  // the single Undef literal, valid only when kind == Unit

  bool triggers() const noexcept {
    return kind == StatusKind::Conflicting || kind == StatusKind::Unit;
  }
};

// Reference classification by counting literal values. The empty clause is
// Conflicting.
inline ClauseStatus clause_status(const Assignment& a, std::span<const Lit> c) {
  std::size_t num_undef = 0;
  Lit undef_lit;
  for (Lit l : c) {
    switch (eval_literal(a, l)) {
      case TruthValue::True: return {StatusKind::Satisfied, {}};
      case TruthValue::Undef:
        ++num_undef;
        undef_lit = l;
        break;
      case TruthValue::False: break;
    }
  }
  if (num_undef == 0) return {StatusKind::Conflicting, {}};
  if (num_undef == 1) return {StatusKind::Unit, undef_lit};
  return {StatusKind::Unresolved, {}};
}

// A clause triggers on an assignment when it is conflicting or unit there.
inline bool triggers(const Assignment& a, std::span<const Lit> c) {
  return clause_status(a, c).triggers();
}

// Removes duplicate literals keeping first occurrences in order. Returns
// nullopt for tautologies (some variable in both polarities).
inline std::optional<Clause> normalize_clause(std::span<const Lit> c) {
  Clause out;
  out.reserve(c.size());
  for (Lit l : c) {
    bool duplicate = false;
    for (Lit m : out) {
      if (m == ~l) return std::nullopt;
      if (m == l) duplicate = true;
    }
    if (!duplicate) out.push_back(l);
  }
  return out;
}

inline bool is_normalized(std::span<const Lit> c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (c[i].var() == c[j].var()) return false;
  return true;
}

// True iff every clause of f has a True literal under m.
inline bool verify_model(const Formula& f, const Assignment& m) {
  return std::all_of(f.clauses.begin(), f.clauses.end(), [&](const Clause& c) {
    return std::any_of(c.begin(), c.end(),
                       [&](Lit l) { return eval_literal(m, l) == TruthValue::True; });
  });
}

}  // namespace trigsat

template <>
struct std::hash<trigsat::Lit> {
  std::size_t operator()(trigsat::Lit l) const noexcept { return std::hash<std::uint32_t>{}(l.code()); }
};
