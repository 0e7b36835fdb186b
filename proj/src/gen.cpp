#include "streamsp/gen.hpp"

#include "streamsp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace streamsp {

std::size_t GenSpec::clause_count() const {
  return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
}

void GenSpec::validate() const {
  if (!(alpha > 0.0))
    throw std::invalid_argument("alpha must be positive");
  if (kind == InstanceKind::ksat) {
    if (k < 2)
      throw std::invalid_argument("k must be at least 2");
    if (n < k)
      throw std::invalid_argument("k-SAT needs n >= k");
  } else if (n < 2) {
    throw std::invalid_argument("2-XORSAT needs n >= 2");
  }
}

namespace {

// Draws `count` distinct variables from 1..n into `out` in draw order.
void draw_distinct(Rng& rng, Var n, std::uint32_t count, std::vector<Var>& out) {
  out.clear();
  while (out.size() < count) {
    const auto v = static_cast<Var>(rng.below(n) + 1);
    bool repeat = false;
    for (Var u : out)
      repeat |= (u == v);
    if (!repeat)
      out.push_back(v);
  }
}

} // namespace

Formula gen_ksat(const GenSpec& spec) {
  if (spec.kind != InstanceKind::ksat)
    throw std::invalid_argument("gen_ksat needs kind = ksat");
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t m = spec.clause_count();
  std::vector<Clause> clauses;
  clauses.reserve(m);
  std::vector<Literal> lits;
  for (std::size_t c = 0; c < m; ++c) {
    lits.clear();
    while (lits.size() < spec.k) {
      const auto v = static_cast<Var>(rng.below(spec.n) + 1);
      bool repeat = false;
      for (const Literal& l : lits)
        repeat |= (l.var == v);
      if (repeat)
        continue;
      lits.emplace_back(v, rng.coin());
    }
    clauses.emplace_back(lits);
  }
  return Formula(spec.n, std::move(clauses));
}

XorInstance gen_2xorsat(const GenSpec& spec) {
  if (spec.kind != InstanceKind::xor2sat)
    throw std::invalid_argument("gen_2xorsat needs kind = xor2sat");
  spec.validate();
  Rng rng(spec.seed);
  XorSystem system;
  system.n_vars = spec.n;
  const std::size_t m = spec.clause_count();
  system.constraints.reserve(m);
  std::vector<Var> pair;
  for (std::size_t c = 0; c < m; ++c) {
    draw_distinct(rng, spec.n, 2, pair);
    system.constraints.push_back({pair[0], pair[1], rng.coin()});
  }
  Formula formula = xor_to_formula(system);
  return {std::move(formula), std::move(system)};
}

} // namespace streamsp
