#include "streamsp/oracle.hpp"

#include <array>
#include <bit>
#include <numeric>
#include <string>

namespace streamsp {

namespace {

constexpr std::array<std::uint64_t, 6> kLowPatterns = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL,
};
constexpr unsigned kLowBits = 6;

struct PackedLiteral {
  std::uint32_t index; // 0-based variable
  bool negated;
};

} // namespace

double EnumerationResult::marginal(Var v) const {
  if (count == 0)
    throw std::logic_error("marginals are undefined without solutions");
  return static_cast<double>(ones.at(v - 1)) / static_cast<double>(count);
}

double EnumerationResult::mean_pairwise_hamming() const {
  if (count < 2)
    throw std::invalid_argument("pairwise distance needs at least two solutions");
  const double n = static_cast<double>(count);
  const double pairs = n * (n - 1.0) / 2.0;
  double differing = 0.0;
  for (std::uint64_t c : ones)
    differing += static_cast<double>(c) * (n - static_cast<double>(c));
  return differing / pairs / static_cast<double>(n_vars);
}

EnumerationResult enumerate(const Formula& f, const EnumerateOptions& opts) {
  const Var n = f.n_vars();
  if (n > opts.cap_n || n > 63)
    throw OracleRefused("enumeration refused: " + std::to_string(n) + " variables exceeds cap " +
                        std::to_string(opts.cap_n));

  std::vector<std::vector<PackedLiteral>> clauses;
  clauses.reserve(f.n_clauses());
  for (const Clause& c : f.clauses()) {
    auto& packed = clauses.emplace_back();
    for (const Literal& lit : c.literals())
      packed.push_back({lit.var - 1, lit.negated});
  }

  EnumerationResult result;
  result.n_vars = n;
  result.ones.assign(n, 0);

  const unsigned low = n < kLowBits ? n : kLowBits;
  const std::uint64_t valid = low == kLowBits ? ~0ULL : ((1ULL << (1U << low)) - 1);
  const std::uint64_t blocks = 1ULL << (n - low);

  for (std::uint64_t block = 0; block < blocks; ++block) {
    std::uint64_t sat = valid;
    for (const auto& clause : clauses) {
      std::uint64_t mask = 0;
      for (const PackedLiteral& lit : clause) {
        if (lit.index < kLowBits) {
          const std::uint64_t pattern = kLowPatterns[lit.index];
          mask |= lit.negated ? ~pattern : pattern;
        } else {
          const bool value = ((block >> (lit.index - kLowBits)) & 1U) != 0;
          if (value != lit.negated) {
            mask = ~0ULL;
            break;
          }
        }
      }
      sat &= mask;
      if (sat == 0)
        break;
    }
    if (sat == 0)
      continue;

    const auto hits = static_cast<std::uint64_t>(std::popcount(sat));
    result.count += hits;
    for (Var b = 0; b < n; ++b) {
      if (b < kLowBits)
        result.ones[b] += static_cast<std::uint64_t>(std::popcount(sat & kLowPatterns[b]));
      else if ((block >> (b - kLowBits)) & 1U)
        result.ones[b] += hits;
    }
    for (std::uint64_t rest = sat;
         rest != 0 && result.solutions.size() < opts.max_solutions; rest &= rest - 1) {
      const auto bit = static_cast<std::uint64_t>(std::countr_zero(rest));
      result.solutions.push_back((block << low) | bit);
    }
  }
  return result;
}

Assignment mask_to_assignment(SolutionMask mask, Var n_vars) {
  Assignment a(n_vars);
  for (Var v = 1; v <= n_vars; ++v)
    a.set(v, ((mask >> (v - 1)) & 1U) != 0);
  return a;
}

bool xor2_satisfiable(const XorSystem& s) {
  s.validate();
  std::vector<Var> parent(s.n_vars + 1);
  std::vector<std::uint8_t> parity(s.n_vars + 1, 0); // parity to parent
  std::iota(parent.begin(), parent.end(), Var{0});

  // Returns the root; `acc` receives the parity from x to the root.
  auto find = [&](Var x, std::uint8_t& acc) {
    acc = 0;
    Var root = x;
    while (parent[root] != root) {
      acc ^= parity[root];
      root = parent[root];
    }
    // Path compression, recomputing each node's parity to the root.
    std::uint8_t remaining = acc;
    while (parent[x] != x) {
      const Var next = parent[x];
      const std::uint8_t step = parity[x];
      parent[x] = root;
      parity[x] = remaining;
      remaining ^= step;
      x = next;
    }
    return root;
  };

  for (const XorConstraint& c : s.constraints) {
    std::uint8_t pi = 0, pj = 0;
    const Var ri = find(c.i, pi);
    const Var rj = find(c.j, pj);
    const std::uint8_t want = c.parity ? 1 : 0;
    if (ri == rj) {
      if ((pi ^ pj) != want)
        return false;
      continue;
    }
    parent[ri] = rj;
    parity[ri] = static_cast<std::uint8_t>(pi ^ pj ^ want);
  }
  return true;
}

double mean_pairwise_hamming(std::span<const SolutionMask> solutions, Var n_vars) {
  if (solutions.size() < 2)
    throw std::invalid_argument("pairwise distance needs at least two solutions");
  if (n_vars == 0)
    return 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < solutions.size(); ++a) {
    for (std::size_t b = a + 1; b < solutions.size(); ++b)
      total += std::popcount(solutions[a] ^ solutions[b]);
  }
  const double pairs = static_cast<double>(solutions.size()) *
                       static_cast<double>(solutions.size() - 1) / 2.0;
  return total / pairs / static_cast<double>(n_vars);
}

double calibration(const MarginalTable& m, const EnumerationResult& e, double bar) {
  if (e.count == 0)
    throw std::invalid_argument("calibration needs a satisfiable formula");
  std::size_t considered = 0;
  std::size_t calibrated = 0;
  for (const VariableMarginal& row : m.rows) {
    if (row.magnetization() < bar)
      continue;
    ++considered;
    const bool value = row.preferred_value();
    const double predicted = value ? row.mu1 : row.mu0;
    const double p1 = e.marginal(row.var);
    const double exact = value ? p1 : 1.0 - p1;
    if (exact >= predicted - 1e-12)
      ++calibrated;
  }
  if (considered == 0)
    return 1.0;
  return static_cast<double>(calibrated) / static_cast<double>(considered);
}

} // namespace streamsp
