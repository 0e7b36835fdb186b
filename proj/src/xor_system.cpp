#include "streamsp/xor_system.hpp"

#include <sstream>

namespace streamsp {

void XorSystem::validate() const {
  for (const XorConstraint& x : constraints) {
    if (x.i == 0 || x.j == 0 || x.i > n_vars || x.j > n_vars)
      throw FormulaError("xor constraint variable out of range");
    if (x.i == x.j)
      throw FormulaError("xor constraint needs two distinct variables");
  }
}

bool XorSystem::is_satisfied_by(const Assignment& a) const {
  for (const XorConstraint& x : constraints) {
    if ((a.value(x.i) != a.value(x.j)) != x.parity)
      return false;
  }
  return true;
}

std::vector<Clause> xor_to_clauses(const XorConstraint& x) {
  const Literal pi(x.i, false), pj(x.j, false);
  if (x.parity)
    return {Clause({~pi, ~pj}), Clause({pi, pj})};
  return {Clause({pi, ~pj}), Clause({~pi, pj})};
}

Formula xor_to_formula(const XorSystem& s) {
  s.validate();
  std::vector<Clause> clauses;
  clauses.reserve(2 * s.constraints.size());
  for (const XorConstraint& x : s.constraints) {
    for (Clause& c : xor_to_clauses(x))
      clauses.push_back(std::move(c));
  }
  return Formula(s.n_vars, std::move(clauses));
}

std::string xor_comment_lines(const XorSystem& s) {
  std::ostringstream out;
  for (const XorConstraint& x : s.constraints)
    out << "c x " << x.i << ' ' << x.j << ' ' << (x.parity ? 1 : 0) << '\n';
  return out.str();
}

std::optional<XorSystem> parse_xor_comments(std::string_view dimacs_text) {
  XorSystem s;
  bool any = false;
  std::istringstream in{std::string(dimacs_text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string tag;
    words >> tag;
    if (tag == "p") {
      std::string cnf;
      words >> cnf >> s.n_vars;
      continue;
    }
    if (tag != "c")
      continue;
    std::string kind;
    if (!(words >> kind) || kind != "x")
      continue;
    XorConstraint x;
    int parity = 0;
    if (!(words >> x.i >> x.j >> parity) || (parity != 0 && parity != 1))
      throw FormulaError("malformed xor comment: " + line);
    x.parity = parity == 1;
    s.constraints.push_back(x);
    any = true;
  }
  if (!any)
    return std::nullopt;
  s.validate();
  return s;
}

} // namespace streamsp
