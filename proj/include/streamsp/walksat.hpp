#pragma once

#include "streamsp/cnf.hpp"
#include "streamsp/sp.hpp"

#include <cstdint>

namespace streamsp {

struct WalkSatParams {
  double noise = 0.5;
  std::uint64_t max_flips = 0; // 0 means 100 * n_vars
  int tries = 10;
  std::uint64_t seed = 0;

  std::uint64_t flip_budget(Var n_vars) const;
  void validate() const; // throws std::invalid_argument
};

struct WalkSatResult {
  bool found = false;
  Assignment assignment; // complete and verified when found
  std::uint64_t flips = 0;
  int tries_used = 0;
  bool deadline_hit = false;
};

// WalkSAT (SKC variant): per try, a uniform random full assignment; then
// repeatedly pick a random violated clause and flip a break-0 variable if one
// exists, else a random variable of the clause with probability `noise`, else
// a variable of minimum break count (random among ties).
WalkSatResult walksat(const Formula& f, const WalkSatParams& p, Deadline deadline = std::nullopt);

} // namespace streamsp
