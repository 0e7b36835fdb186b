#include "streamsp/walksat.hpp"

#include "streamsp/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace streamsp {

std::uint64_t WalkSatParams::flip_budget(Var n_vars) const {
  if (max_flips != 0)
    return max_flips;
  return std::max<std::uint64_t>(1, 100ULL * n_vars);
}

void WalkSatParams::validate() const {
  if (!(noise >= 0.0 && noise <= 1.0))
    throw std::invalid_argument("noise must lie in [0, 1]");
  if (tries < 1)
    throw std::invalid_argument("tries must be >= 1");
}

namespace {

class WalkState {
public:
  explicit WalkState(const Formula& f)
      : n_(f.n_vars()), clause_start_(f.n_clauses() + 1, 0), occurs_(2 * (f.n_vars() + 1)),
        value_(f.n_vars() + 1, 0), break_(f.n_vars() + 1, 0), true_count_(f.n_clauses(), 0),
        critical_(f.n_clauses(), 0), unsat_pos_(f.n_clauses(), kAbsent) {
    for (ClauseId c = 0; c < f.n_clauses(); ++c) {
      for (const Literal& lit : f.clause(c).literals()) {
        lits_.push_back(lit);
        occurs_[code(lit)].push_back(c);
      }
      clause_start_[c + 1] = static_cast<std::uint32_t>(lits_.size());
    }
  }

  void randomize(Rng& rng) {
    for (Var v = 1; v <= n_; ++v) {
      value_[v] = rng.coin() ? 1 : 0;
      break_[v] = 0;
    }
    unsat_.clear();
    for (ClauseId c = 0; c < true_count_.size(); ++c) {
      std::uint32_t count = 0;
      Var crit = 0;
      for (std::uint32_t k = clause_start_[c]; k < clause_start_[c + 1]; ++k) {
        const Literal& lit = lits_[k];
        if (lit.is_satisfied_by(value_[lit.var] != 0)) {
          ++count;
          crit ^= lit.var;
        }
      }
      true_count_[c] = count;
      critical_[c] = crit;
      unsat_pos_[c] = kAbsent;
      if (count == 0)
        add_unsat(c);
      else if (count == 1)
        ++break_[crit];
    }
  }

  bool satisfied() const { return unsat_.empty(); }

  void step(Rng& rng, double noise) {
    const ClauseId c = unsat_[rng.below(unsat_.size())];
    const std::uint32_t begin = clause_start_[c];
    const std::uint32_t len = clause_start_[c + 1] - begin;

    std::uint32_t best = UINT32_MAX;
    ties_.clear();
    for (std::uint32_t k = 0; k < len; ++k) {
      const Var v = lits_[begin + k].var;
      const std::uint32_t b = break_[v];
      if (b < best) {
        best = b;
        ties_.clear();
      }
      if (b == best)
        ties_.push_back(v);
    }
    Var pick;
    if (best > 0 && rng.bernoulli(noise))
      pick = lits_[begin + rng.below(len)].var;
    else
      pick = ties_[rng.below(ties_.size())];
    flip(pick);
  }

  Assignment assignment() const {
    Assignment a(n_);
    for (Var v = 1; v <= n_; ++v)
      a.set(v, value_[v] != 0);
    return a;
  }

private:
  static constexpr std::uint32_t kAbsent = UINT32_MAX;

  static std::size_t code(Literal lit) { return 2 * lit.var + (lit.negated ? 1 : 0); }

  void add_unsat(ClauseId c) {
    unsat_pos_[c] = static_cast<std::uint32_t>(unsat_.size());
    unsat_.push_back(c);
  }

  void remove_unsat(ClauseId c) {
    const std::uint32_t pos = unsat_pos_[c];
    const ClauseId last = unsat_.back();
    unsat_[pos] = last;
    unsat_pos_[last] = pos;
    unsat_.pop_back();
    unsat_pos_[c] = kAbsent;
  }

  void flip(Var v) {
    const bool was = value_[v] != 0;
    value_[v] = was ? 0 : 1;
    // The literal of v that was true before the flip becomes false.
    for (ClauseId c : occurs_[code(Literal(v, !was))]) {
      critical_[c] ^= v;
      const std::uint32_t count = --true_count_[c];
      if (count == 0) {
        --break_[v];
        add_unsat(c);
      } else if (count == 1) {
        ++break_[critical_[c]];
      }
    }
    for (ClauseId c : occurs_[code(Literal(v, was))]) {
      const std::uint32_t count = ++true_count_[c];
      if (count == 1) {
        remove_unsat(c);
        ++break_[v];
      } else if (count == 2) {
        --break_[critical_[c]];
      }
      critical_[c] ^= v;
    }
  }

  Var n_;
  std::vector<Literal> lits_;
  std::vector<std::uint32_t> clause_start_;
  std::vector<std::vector<ClauseId>> occurs_;
  std::vector<std::uint8_t> value_;
  std::vector<std::uint32_t> break_;
  std::vector<std::uint32_t> true_count_;
  std::vector<Var> critical_; // XOR of the variables of true literals
  std::vector<ClauseId> unsat_;
  std::vector<std::uint32_t> unsat_pos_;
  std::vector<Var> ties_;
};

} // namespace

WalkSatResult walksat(const Formula& f, const WalkSatParams& p, Deadline deadline) {
  p.validate();
  WalkSatResult result;
  Rng rng(p.seed);
  WalkState state(f);
  const std::uint64_t budget = p.flip_budget(f.n_vars());

  for (int t = 0; t < p.tries; ++t) {
    result.tries_used = t + 1;
    state.randomize(rng);
    std::uint64_t flips = 0;
    while (!state.satisfied() && flips < budget) {
      if ((flips & 0xfff) == 0 && deadline && std::chrono::steady_clock::now() >= *deadline) {
        result.deadline_hit = true;
        result.flips += flips;
        return result;
      }
      state.step(rng, p.noise);
      ++flips;
    }
    result.flips += flips;
    if (state.satisfied()) {
      Assignment a = state.assignment();
      if (!evaluate(f, a).satisfied)
        throw std::logic_error("walksat bookkeeping produced an unsatisfying assignment");
      result.found = true;
      result.assignment = std::move(a);
      return result;
    }
  }
  return result;
}

} // namespace streamsp
