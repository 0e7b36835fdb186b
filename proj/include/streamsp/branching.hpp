#pragma once

#include "streamsp/factor_graph.hpp"
#include "streamsp/sp.hpp"

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace streamsp {

struct Candidate {
  Var var = 0;
  bool preferred_value = false;
  double magnetization = 0.0;

  Literal literal() const { return {var, !preferred_value}; }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

using CandidateList = std::vector<Candidate>;

// Per-variable participation counts in streamlining clauses. A variable whose
// count has reached `threshold` is no longer a streamlining candidate.
class StreamlineCounters {
public:
  StreamlineCounters() = default;
  StreamlineCounters(Var n_vars, std::uint32_t threshold);

  std::uint32_t threshold() const { return threshold_; }
  std::uint32_t count(Var v) const { return counts_.at(v); }
  bool eligible(Var v) const { return counts_.at(v) < threshold_; }
  void increment(Var v);

  // Duplicate tracking for emitted 2-clauses, keyed by ordered DIMACS literals.
  bool seen(Literal a, Literal b) const;
  void remember(Literal a, Literal b);

private:
  static std::pair<int, int> key(Literal a, Literal b);

  std::uint32_t threshold_ = 2;
  std::vector<std::uint32_t> counts_;
  std::set<std::pair<int, int>> emitted_;
};

// Top `limit` rows by descending magnetization, ties broken by ascending
// variable id. With `counters`, variables at their threshold are skipped.
CandidateList rank_candidates(const MarginalTable& m, const StreamlineCounters* counters,
                              std::size_t limit);

// Top R candidates with their preferred values, ready for unit_propagate.
// Empty when there is nothing left to branch on.
std::vector<Fix> decimate_step(const MarginalTable& m, std::size_t r);

enum class Pairing {
  highest_with_lowest, // (l1 v l_E), (l2 v l_{E-1}), ...
  blocks               // (l1 v l_{h+1}), (l2 v l_{h+2}), ..., h = E / 2
};

// Pairs up to 2R eligible candidates into 2-clauses over their preferred
// literals. With E < 2R candidates, only floor(E/2) clauses are formed and a
// leftover candidate is dropped. Pairs already emitted earlier are skipped.
// Clauses are returned, not yet inserted anywhere.
std::vector<Clause> pair_candidates(const CandidateList& candidates, std::size_t r,
                                    Pairing pairing, const StreamlineCounters* counters);

// Ranks, pairs, inserts the clauses into `g` and updates `counters`.
// Returns the inserted clauses (empty if fewer than two eligible candidates).
std::vector<Clause> streamline_step(FactorGraph& g, const MarginalTable& m, std::size_t r,
                                    StreamlineCounters& counters,
                                    Pairing pairing = Pairing::highest_with_lowest);

enum class RBasis { original_n, live_n };

// max(1, round(r_frac * basis)).
std::size_t candidates_per_round(double r_frac, std::size_t basis);

} // namespace streamsp
