#pragma once

#include "streamsp/cnf.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamsp {

// x_i XOR x_j = parity
struct XorConstraint {
  Var i = 0;
  Var j = 0;
  bool parity = false;

  friend bool operator==(const XorConstraint&, const XorConstraint&) = default;
};

struct XorSystem {
  Var n_vars = 0;
  std::vector<XorConstraint> constraints;

  void validate() const; // throws FormulaError
  bool is_satisfied_by(const Assignment& a) const;

  friend bool operator==(const XorSystem&, const XorSystem&) = default;
};

// Two clauses per constraint:
//   parity 1: (-i v -j) (i v j)
//   parity 0: (i v -j) (-i v j)
std::vector<Clause> xor_to_clauses(const XorConstraint& x);
Formula xor_to_formula(const XorSystem& s);

// Serialized as DIMACS comment lines "c x <i> <j> <parity>", one per
// constraint, so a CNF file can carry its parity system for oracle replay.
std::string xor_comment_lines(const XorSystem& s);

// Collects "c x i j p" lines from DIMACS text. Returns nullopt when there are none.
std::optional<XorSystem> parse_xor_comments(std::string_view dimacs_text);

} // namespace streamsp
