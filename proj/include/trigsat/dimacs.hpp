#pragma once

#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trigsat/core.hpp"

namespace trigsat {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct DimacsDocument {
  std::size_t declared_vars = 0;
  std::size_t declared_clauses = 0;
  Formula formula;
  std::size_t tautologies_dropped = 0;
  std::vector<std::string> warnings;
};

// Reads DIMACS CNF. Comment lines start with 'c'; the "p cnf V C" header
// must precede the first clause; clauses are runs of nonzero integers closed
// by 0 and may span lines. A line starting with '%' ends the input (SATLIB
// convention). The declared clause count is only checked with a warning.
inline DimacsDocument read_dimacs(std::istream& in) {
  DimacsDocument doc;
  bool have_header = false;
  Clause current;
  std::size_t line_no = 0;
  std::size_t clause_start_line = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    const auto first = rest.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    rest.remove_prefix(first);
    if (rest.front() == 'c') continue;
    if (rest.front() == '%') break;
    if (rest.front() == 'p') {
      if (have_header) throw ParseError(line_no, "duplicate problem line");
      std::istringstream header{std::string(rest)};
      std::string p, fmt;
      long long vars = -1, clauses = -1;
      std::string extra;
      if (!(header >> p >> fmt >> vars >> clauses) || p != "p" || fmt != "cnf" || vars < 0 || clauses < 0 ||
          (header >> extra))
        throw ParseError(line_no, "malformed problem line, expected 'p cnf <vars> <clauses>'");
      doc.declared_vars = static_cast<std::size_t>(vars);
      doc.declared_clauses = static_cast<std::size_t>(clauses);
      doc.formula.num_vars = doc.declared_vars;
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(line_no, "clause before 'p cnf' header");

    std::size_t pos = 0;
    while (pos < rest.size()) {
      while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == '\t' || rest[pos] == '\r')) ++pos;
      if (pos >= rest.size()) break;
      std::size_t end = pos;
      while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t' && rest[end] != '\r') ++end;
      const std::string_view token = rest.substr(pos, end - pos);
      long long value = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(line_no, "not an integer: '" + std::string(token) + "'");
      pos = end;
      if (value == 0) {
        if (auto c = normalize_clause(current))
          doc.formula.clauses.push_back(std::move(*c));
        else
          ++doc.tautologies_dropped;
        current.clear();
        continue;
      }
      const auto magnitude = static_cast<std::size_t>(value < 0 ? -value : value);
      if (magnitude > doc.declared_vars)
        throw ParseError(line_no, "literal " + std::string(token) + " out of range (" +
                                      std::to_string(doc.declared_vars) + " variables declared)");
      if (current.empty()) clause_start_line = line_no;
      current.push_back(Lit::from_dimacs(static_cast<long>(value)));
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'p cnf' header");
  if (!current.empty()) throw ParseError(clause_start_line, "final clause is not terminated by 0");
  const std::size_t read = doc.formula.clauses.size() + doc.tautologies_dropped;
  if (read != doc.declared_clauses)
    doc.warnings.push_back("header declares " + std::to_string(doc.declared_clauses) + " clauses, found " +
                           std::to_string(read));
  return doc;
}

inline Formula parse_dimacs(std::istream& in) { return read_dimacs(in).formula; }

inline Formula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

inline void write_dimacs(std::ostream& out, const Formula& f) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (Lit l : c) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
}

}  // namespace trigsat
