#pragma once

#include "streamsp/cnf.hpp"
#include "streamsp/sp.hpp"
#include "streamsp/xor_system.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace streamsp {

class OracleRefused : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct EnumerateOptions {
  Var cap_n = 26;
  std::size_t max_solutions = 0; // explicit solutions kept, in ascending order
};

// Solutions are stored as bitmasks: bit (v-1) holds x_v.
using SolutionMask = std::uint64_t;

struct EnumerationResult {
  Var n_vars = 0;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> ones; // ones[v-1] = solutions with x_v = 1
  std::vector<SolutionMask> solutions;

  bool satisfiable() const { return count > 0; }
  // P(x_v = 1) under the uniform distribution over solutions. Requires count > 0.
  double marginal(Var v) const;
  // Exact mean normalized Hamming distance over all unordered pairs of
  // distinct solutions, from per-variable counts. Requires count >= 2.
  double mean_pairwise_hamming() const;
};

// Brute force over all 2^n assignments, 64 at a time: the six lowest
// variables vary inside a machine word and each clause is evaluated as a
// bitwise OR of literal masks. Throws OracleRefused if n_vars > cap_n.
EnumerationResult enumerate(const Formula& f, const EnumerateOptions& opts = {});

Assignment mask_to_assignment(SolutionMask mask, Var n_vars);

// Union-find with parity offsets; unsatisfiable iff some constraint closes a
// cycle of odd total parity.
bool xor2_satisfiable(const XorSystem& s);

// Mean over unordered pairs of Hamming distance / n_vars. Throws
// std::invalid_argument for fewer than two solutions.
double mean_pairwise_hamming(std::span<const SolutionMask> solutions, Var n_vars);

// Fraction of variables with magnetization >= bar whose exact marginal toward
// the SP-preferred value is at least the SP-predicted mass for that value.
// 1.0 when no variable clears the bar. Requires e.count > 0.
double calibration(const MarginalTable& m, const EnumerationResult& e, double bar = 0.9);

} // namespace streamsp
