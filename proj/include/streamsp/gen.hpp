#pragma once

#include "streamsp/cnf.hpp"
#include "streamsp/xor_system.hpp"

#include <cstdint>

namespace streamsp {

enum class InstanceKind { ksat, xor2sat };

struct GenSpec {
  Var n = 0;
  double alpha = 0.0;
  std::uint32_t k = 3;
  std::uint64_t seed = 0;
  InstanceKind kind = InstanceKind::ksat;

  // m = round(alpha * n), halves rounded away from zero.
  std::size_t clause_count() const;
  void validate() const; // throws std::invalid_argument
};

// Random k-SAT. For each clause, for each of the k slots: draw a variable
// uniformly from 1..n, redrawing while it repeats one already in the clause,
// then draw its sign with one coin flip (negated on heads).
Formula gen_ksat(const GenSpec& spec);

struct XorInstance {
  Formula formula;
  XorSystem system;
};

// Random 2-XORSAT: m constraints, each over two distinct uniform variables
// (drawn as above) followed by a fair parity bit; CNF has 2m clauses.
XorInstance gen_2xorsat(const GenSpec& spec);

} // namespace streamsp
