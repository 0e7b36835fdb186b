#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace streamsp {

using Var = std::uint32_t;      // 1-based, DIMACS numbering
using ClauseId = std::uint32_t; // 0-based position in the clause database

struct Literal {
  Var var = 0;
  bool negated = false;

  constexpr Literal() = default;
  constexpr Literal(Var v, bool neg) : var(v), negated(neg) {}

  static Literal from_dimacs(int value);
  int to_dimacs() const { return negated ? -static_cast<int>(var) : static_cast<int>(var); }

  // The value of `var` that makes this literal true.
  bool satisfying_value() const { return !negated; }
  bool is_satisfied_by(bool value) const { return value != negated; }

  constexpr Literal operator~() const { return {var, !negated}; }
  friend constexpr bool operator==(const Literal&, const Literal&) = default;
  friend constexpr auto operator<=>(const Literal&, const Literal&) = default;
};

enum class ClauseOrigin : std::uint8_t { original, streamlining };

class FormulaError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Nonempty disjunction over distinct variables. Exact duplicate literals are
// dropped (first occurrence kept); a clause holding x and not-x is rejected.
class Clause {
public:
  Clause(std::vector<Literal> literals, ClauseOrigin origin = ClauseOrigin::original);
  Clause(std::initializer_list<int> dimacs, ClauseOrigin origin = ClauseOrigin::original);

  std::span<const Literal> literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  ClauseOrigin origin() const { return origin_; }
  bool is_streamlining() const { return origin_ == ClauseOrigin::streamlining; }

  friend bool operator==(const Clause&, const Clause&) = default;

private:
  std::vector<Literal> literals_;
  ClauseOrigin origin_;
};

class Formula {
public:
  Formula() = default;
  Formula(Var n_vars, std::vector<Clause> clauses);

  Var n_vars() const { return n_vars_; }
  std::size_t n_clauses() const { return clauses_.size(); }
  std::span<const Clause> clauses() const { return clauses_; }
  const Clause& clause(ClauseId id) const { return clauses_.at(id); }
  double density() const {
    return n_vars_ == 0 ? 0.0 : static_cast<double>(clauses_.size()) / n_vars_;
  }

  // New formula with `extra` appended after the existing clauses.
  Formula with_clauses(std::span<const Clause> extra) const;

  friend bool operator==(const Formula&, const Formula&) = default;

private:
  Var n_vars_ = 0;
  std::vector<Clause> clauses_;
};

// Partial map from variables 1..n to {0,1}.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(Var n_vars) : values_(n_vars, kUnassigned) {}

  Var n_vars() const { return static_cast<Var>(values_.size()); }
  std::optional<bool> get(Var v) const;
  bool is_assigned(Var v) const { return get(v).has_value(); }
  bool value(Var v) const; // throws if unassigned
  void set(Var v, bool value);
  void clear(Var v);
  bool is_complete() const;
  std::size_t assigned_count() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

private:
  static constexpr std::int8_t kUnassigned = -1;
  std::size_t index(Var v) const;
  std::vector<std::int8_t> values_;
};

struct Evaluation {
  bool satisfied = false;
  std::vector<ClauseId> violated;
};

// Throws FormulaError when `a` does not assign every variable of `f`.
Evaluation evaluate(const Formula& f, const Assignment& a);

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// DIMACS CNF. A comment line exactly "c streamlined" marks the next clause as
// a streamlining clause; emit_dimacs writes the same marker, so the clause
// origin survives a round trip.
Formula parse_dimacs(std::string_view text);
Formula parse_dimacs(std::istream& in);
std::string emit_dimacs(const Formula& f);
void emit_dimacs(const Formula& f, std::ostream& out);

Formula read_dimacs_file(const std::string& path);

} // namespace streamsp
