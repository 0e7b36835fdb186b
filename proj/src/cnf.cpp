#include "streamsp/cnf.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace streamsp {

Literal Literal::from_dimacs(int value) {
  if (value == 0)
    throw FormulaError("literal 0 is not a variable");
  const auto var = static_cast<Var>(value < 0 ? -static_cast<long long>(value) : value);
  return {var, value < 0};
}

namespace {

std::vector<Literal> normalize_literals(std::vector<Literal> literals) {
  std::vector<Literal> out;
  out.reserve(literals.size());
  for (const Literal& lit : literals) {
    if (lit.var == 0)
      throw FormulaError("variable indices are 1-based");
    auto same_var = std::find_if(out.begin(), out.end(),
                                 [&](const Literal& o) { return o.var == lit.var; });
    if (same_var == out.end()) {
      out.push_back(lit);
    } else if (same_var->negated != lit.negated) {
      throw FormulaError("tautological clause on variable " + std::to_string(lit.var));
    }
  }
  return out;
}

} // namespace

Clause::Clause(std::vector<Literal> literals, ClauseOrigin origin)
    : literals_(normalize_literals(std::move(literals))), origin_(origin) {
  if (literals_.empty())
    throw FormulaError("empty clause");
  if (origin_ == ClauseOrigin::streamlining && literals_.size() > 2)
    throw FormulaError("streamlining clauses have at most two literals");
}

Clause::Clause(std::initializer_list<int> dimacs, ClauseOrigin origin)
    : Clause(
          [&] {
            std::vector<Literal> lits;
            lits.reserve(dimacs.size());
            for (int v : dimacs)
              lits.push_back(Literal::from_dimacs(v));
            return lits;
          }(),
          origin) {}

Formula::Formula(Var n_vars, std::vector<Clause> clauses)
    : n_vars_(n_vars), clauses_(std::move(clauses)) {
  for (std::size_t c = 0; c < clauses_.size(); ++c) {
    for (const Literal& lit : clauses_[c].literals()) {
      if (lit.var > n_vars_)
        throw FormulaError("clause " + std::to_string(c) + " uses variable " +
                           std::to_string(lit.var) + " > n_vars " + std::to_string(n_vars_));
    }
  }
}

Formula Formula::with_clauses(std::span<const Clause> extra) const {
  std::vector<Clause> all = clauses_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Formula(n_vars_, std::move(all));
}

std::size_t Assignment::index(Var v) const {
  if (v == 0 || v > values_.size())
    throw std::out_of_range("variable " + std::to_string(v) + " outside assignment domain");
  return v - 1;
}

std::optional<bool> Assignment::get(Var v) const {
  const std::int8_t x = values_[index(v)];
  if (x == kUnassigned)
    return std::nullopt;
  return x != 0;
}

bool Assignment::value(Var v) const {
  auto x = get(v);
  if (!x)
    throw std::logic_error("variable " + std::to_string(v) + " is unassigned");
  return *x;
}

void Assignment::set(Var v, bool value) { values_[index(v)] = value ? 1 : 0; }

void Assignment::clear(Var v) { values_[index(v)] = kUnassigned; }

bool Assignment::is_complete() const {
  return std::none_of(values_.begin(), values_.end(),
                      [](std::int8_t x) { return x == kUnassigned; });
}

std::size_t Assignment::assigned_count() const {
  return static_cast<std::size_t>(std::count_if(
      values_.begin(), values_.end(), [](std::int8_t x) { return x != kUnassigned; }));
}

Evaluation evaluate(const Formula& f, const Assignment& a) {
  if (a.n_vars() < f.n_vars())
    throw FormulaError("assignment covers fewer variables than the formula");
  for (Var v = 1; v <= f.n_vars(); ++v) {
    if (!a.is_assigned(v))
      throw FormulaError("incomplete assignment: variable " + std::to_string(v) + " unassigned");
  }
  Evaluation result;
  for (ClauseId c = 0; c < f.n_clauses(); ++c) {
    const auto lits = f.clause(c).literals();
    const bool sat = std::any_of(lits.begin(), lits.end(), [&](const Literal& lit) {
      return lit.is_satisfied_by(a.value(lit.var));
    });
    if (!sat)
      result.violated.push_back(c);
  }
  result.satisfied = result.violated.empty();
  return result;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

constexpr std::string_view kStreamlinedMarker = "streamlined";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
      ++j;
    if (j > i)
      out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Int> std::optional<Int> to_int(std::string_view tok) {
  Int value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    return std::nullopt;
  return value;
}

class DimacsReader {
public:
  void line(std::string_view raw) {
    ++line_no_;
    const std::string_view text = trim(raw);
    if (text.empty() || done_)
      return;
    if (text.front() == 'c') {
      if (trim(text.substr(1)) == kStreamlinedMarker)
        next_is_streamlining_ = true;
      return;
    }
    if (text.front() == '%') {
      // SATLIB benchmark files end with "%\n0\n".
      done_ = true;
      return;
    }
    if (text.front() == 'p') {
      header(text);
      return;
    }
    if (!have_header_)
      throw ParseError(line_no_, "clause data before 'p cnf' header");
    for (std::string_view tok : split_ws(text)) {
      auto value = to_int<long long>(tok);
      if (!value)
        throw ParseError(line_no_, "expected integer literal, got '" + std::string(tok) + "'");
      if (*value == 0) {
        finish_clause();
        continue;
      }
      const long long mag = *value < 0 ? -*value : *value;
      if (mag > static_cast<long long>(n_vars_))
        throw ParseError(line_no_, "literal " + std::to_string(*value) + " exceeds n_vars " +
                                       std::to_string(n_vars_));
      pending_.push_back(Literal(static_cast<Var>(mag), *value < 0));
    }
  }

  Formula finish() {
    ++line_no_;
    if (!have_header_)
      throw ParseError(line_no_, "missing 'p cnf' header");
    if (!pending_.empty())
      throw ParseError(line_no_, "last clause is not terminated by 0");
    if (clauses_.size() != declared_clauses_)
      throw ParseError(line_no_, "header declares " + std::to_string(declared_clauses_) +
                                     " clauses, found " + std::to_string(clauses_.size()));
    return Formula(n_vars_, std::move(clauses_));
  }

private:
  void header(std::string_view text) {
    if (have_header_)
      throw ParseError(line_no_, "duplicate 'p cnf' header");
    const auto toks = split_ws(text);
    if (toks.size() != 4 || toks[0] != "p" || toks[1] != "cnf")
      throw ParseError(line_no_, "malformed header, expected 'p cnf <vars> <clauses>'");
    auto n = to_int<std::uint32_t>(toks[2]);
    auto m = to_int<std::uint64_t>(toks[3]);
    if (!n || !m || *n > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
      throw ParseError(line_no_, "malformed header counts");
    n_vars_ = *n;
    declared_clauses_ = *m;
    have_header_ = true;
  }

  void finish_clause() {
    const ClauseOrigin origin =
        next_is_streamlining_ ? ClauseOrigin::streamlining : ClauseOrigin::original;
    next_is_streamlining_ = false;
    if (pending_.empty())
      throw ParseError(line_no_, "empty clause");
    try {
      clauses_.emplace_back(std::move(pending_), origin);
    } catch (const FormulaError& e) {
      throw ParseError(line_no_, e.what());
    }
    pending_.clear();
  }

  std::size_t line_no_ = 0;
  bool have_header_ = false;
  bool done_ = false;
  bool next_is_streamlining_ = false;
  Var n_vars_ = 0;
  std::uint64_t declared_clauses_ = 0;
  std::vector<Literal> pending_;
  std::vector<Clause> clauses_;
};

} // namespace

Formula parse_dimacs(std::string_view text) {
  DimacsReader reader;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    reader.line(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return reader.finish();
}

Formula parse_dimacs(std::istream& in) {
  DimacsReader reader;
  std::string line;
  while (std::getline(in, line))
    reader.line(line);
  return reader.finish();
}

void emit_dimacs(const Formula& f, std::ostream& out) {
  out << "p cnf " << f.n_vars() << ' ' << f.n_clauses() << '\n';
  for (const Clause& clause : f.clauses()) {
    if (clause.is_streamlining())
      out << "c " << kStreamlinedMarker << '\n';
    for (const Literal& lit : clause.literals())
      out << lit.to_dimacs() << ' ';
    out << "0\n";
  }
}

std::string emit_dimacs(const Formula& f) {
  std::ostringstream out;
  emit_dimacs(f, out);
  return out.str();
}

Formula read_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return parse_dimacs(in);
}

} // namespace streamsp
