#include "streamsp/branching.hpp"

#include <algorithm>
#include <cmath>

namespace streamsp {

StreamlineCounters::StreamlineCounters(Var n_vars, std::uint32_t threshold)
    : threshold_(threshold), counts_(n_vars + 1, 0) {}

void StreamlineCounters::increment(Var v) { ++counts_.at(v); }

std::pair<int, int> StreamlineCounters::key(Literal a, Literal b) {
  int x = a.to_dimacs(), y = b.to_dimacs();
  if (x > y)
    std::swap(x, y);
  return {x, y};
}

bool StreamlineCounters::seen(Literal a, Literal b) const {
  return emitted_.contains(key(a, b));
}

void StreamlineCounters::remember(Literal a, Literal b) { emitted_.insert(key(a, b)); }

CandidateList rank_candidates(const MarginalTable& m, const StreamlineCounters* counters,
                              std::size_t limit) {
  CandidateList list;
  list.reserve(m.rows.size());
  for (const VariableMarginal& row : m.rows) {
    if (counters && !counters->eligible(row.var))
      continue;
    list.push_back({row.var, row.preferred_value(), row.magnetization()});
  }
  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.magnetization != b.magnetization)
      return a.magnetization > b.magnetization;
    return a.var < b.var;
  };
  if (limit < list.size()) {
    std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(limit),
                      list.end(), better);
    list.resize(limit);
  } else {
    std::sort(list.begin(), list.end(), better);
  }
  return list;
}

std::vector<Fix> decimate_step(const MarginalTable& m, std::size_t r) {
  std::vector<Fix> fixes;
  for (const Candidate& c : rank_candidates(m, nullptr, r))
    fixes.push_back({c.var, c.preferred_value});
  return fixes;
}

std::vector<Clause> pair_candidates(const CandidateList& candidates, std::size_t r,
                                    Pairing pairing, const StreamlineCounters* counters) {
  const std::size_t e = std::min(candidates.size(), 2 * r);
  const std::size_t pairs = e / 2;
  std::vector<Clause> clauses;
  clauses.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t partner = pairing == Pairing::highest_with_lowest ? e - 1 - i : i + pairs;
    const Literal a = candidates[i].literal();
    const Literal b = candidates[partner].literal();
    if (counters && counters->seen(a, b))
      continue;
    clauses.emplace_back(std::vector<Literal>{a, b}, ClauseOrigin::streamlining);
  }
  return clauses;
}

std::vector<Clause> streamline_step(FactorGraph& g, const MarginalTable& m, std::size_t r,
                                    StreamlineCounters& counters, Pairing pairing) {
  const CandidateList candidates = rank_candidates(m, &counters, 2 * r);
  std::vector<Clause> clauses = pair_candidates(candidates, r, pairing, &counters);
  for (const Clause& clause : clauses) {
    g.add_clause(clause);
    const auto lits = clause.literals();
    counters.remember(lits[0], lits[1]);
    for (const Literal& lit : lits)
      counters.increment(lit.var);
  }
  return clauses;
}

std::size_t candidates_per_round(double r_frac, std::size_t basis) {
  const auto r = std::llround(r_frac * static_cast<double>(basis));
  return r < 1 ? 1 : static_cast<std::size_t>(r);
}

} // namespace streamsp
