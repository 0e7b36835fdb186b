#include "streamsp/sp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace streamsp {

void SpConfig::validate() const {
  if (!(msg_tol > 0.0))
    throw std::invalid_argument("msg_tol must be positive");
  if (max_sweeps < 1)
    throw std::invalid_argument("max_sweeps must be >= 1");
  if (restarts < 1)
    throw std::invalid_argument("restarts must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0))
    throw std::invalid_argument("damping must lie in [0, 1)");
}

void init_messages(const FactorGraph& g, Rng& rng, MessageState& msgs) {
  msgs.eta.resize(g.edge_slots());
  for (double& x : msgs.eta)
    x = rng.uniform();
}

MessageState init_messages(const FactorGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  MessageState msgs;
  init_messages(g, rng, msgs);
  return msgs;
}

void extend_messages(const FactorGraph& g, Rng& rng, MessageState& msgs) {
  const std::size_t old = msgs.eta.size();
  msgs.eta.resize(g.edge_slots());
  for (std::size_t e = old; e < msgs.eta.size(); ++e)
    msgs.eta[e] = rng.uniform();
}

namespace {

// Factors 1 - eta at or below this are treated as exact zeros so that a
// cavity product can remove them without dividing by ~0.
constexpr double kZeroFactor = 1e-14;

struct SideProduct {
  double prod = 1.0;
  std::uint32_t zeros = 0;

  void multiply(double f) {
    if (f <= kZeroFactor)
      ++zeros;
    else
      prod *= f;
  }
  void divide(double f) {
    if (f <= kZeroFactor)
      --zeros;
    else
      prod /= f;
  }
  double value() const { return zeros != 0 ? 0.0 : prod; }
  // Product with one factor `f` (known to be included) taken out.
  double without(double f) const {
    if (f <= kZeroFactor)
      return zeros == 1 ? prod : 0.0;
    return zeros != 0 ? 0.0 : prod / f;
  }
};

// Per variable, products of (1 - eta) over live incident edges, split by the
// sign of the occurrence: [0] positive, [1] negated.
class CavityProducts {
public:
  CavityProducts(const FactorGraph& g, const MessageState& msgs) : sides_(g.n_vars() + 1) {
    for (Var v = 1; v <= g.n_vars(); ++v) {
      if (!g.var_live(v))
        continue;
      for (EdgeId e : g.var_edges(v)) {
        if (g.edge_live(e))
          sides_[v][g.edge(e).negated].multiply(1.0 - msgs[e]);
      }
    }
  }

  SideProduct& side(Var v, bool negated) { return sides_[v][negated]; }

private:
  std::vector<std::array<SideProduct, 2>> sides_;
};

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

} // namespace

SpSweepResult sp_update_sweep(const FactorGraph& g, MessageState& msgs, Rng& rng,
                            const SpConfig& cfg) {
  if (msgs.size() < g.edge_slots())
    throw std::invalid_argument("message state does not cover the graph");

  // Rebuilt every sweep so incremental division error cannot accumulate.
  CavityProducts cavity(g, msgs);

  std::vector<EdgeId> order;
  order.reserve(g.live_edge_count());
  for (EdgeId e = 0; e < g.edge_slots(); ++e) {
    if (g.edge_live(e))
      order.push_back(e);
  }
  rng.shuffle(std::span<EdgeId>(order));

  SpSweepResult result;
  for (EdgeId e : order) {
    const Edge& target = g.edge(e);
    double updated = 1.0;
    for (EdgeId other : g.clause_edges(target.clause)) {
      if (other == e || !g.edge_live(other))
        continue;
      const Edge& ej = g.edge(other);
      const double same = cavity.side(ej.var, ej.negated).without(1.0 - msgs[other]);
      const double opposite = cavity.side(ej.var, !ej.negated).value();
      const double norm = same + opposite - same * opposite;
      if (norm <= 0.0) {
        result.contradiction = true;
        result.contradiction_var = ej.var;
        updated = 0.0;
        continue;
      }
      updated *= (1.0 - opposite) * same / norm;
    }
    updated = clamp01(updated);
    const double old = msgs[e];
    if (cfg.damping > 0.0)
      updated = (1.0 - cfg.damping) * updated + cfg.damping * old;

    SideProduct& own = cavity.side(target.var, target.negated);
    own.divide(1.0 - old);
    own.multiply(1.0 - updated);
    msgs[e] = updated;
    result.max_delta = std::max(result.max_delta, std::abs(updated - old));
  }
  return result;
}

SpResult run_sp(const FactorGraph& g, const SpConfig& cfg, Rng& rng, MessageState& msgs,
                Deadline deadline) {
  cfg.validate();
  if (msgs.size() < g.edge_slots())
    extend_messages(g, rng, msgs);

  SpResult result;
  if (g.live_edge_count() == 0) {
    result.status = SpStatus::converged;
    result.attempts = 1;
    return result;
  }
  for (int attempt = 0; attempt < cfg.restarts; ++attempt) {
    if (attempt > 0)
      init_messages(g, rng, msgs);
    result.attempts = attempt + 1;
    for (int s = 0; s < cfg.max_sweeps; ++s) {
      if (deadline && std::chrono::steady_clock::now() >= *deadline) {
        result.status = SpStatus::unconverged;
        return result;
      }
      const SpSweepResult sweep = sp_update_sweep(g, msgs, rng, cfg);
      ++result.sweeps;
      if (sweep.contradiction) {
        result.status = SpStatus::contradiction;
        result.contradiction_var = sweep.contradiction_var;
        return result;
      }
      if (sweep.max_delta < cfg.msg_tol) {
        result.status = SpStatus::converged;
        return result;
      }
    }
  }
  result.status = SpStatus::unconverged;
  return result;
}

SpResult run_sp(const FactorGraph& g, const SpConfig& cfg, std::uint64_t seed,
                MessageState& out) {
  Rng rng(seed);
  init_messages(g, rng, out);
  return run_sp(g, cfg, rng, out);
}

double MarginalTable::total_bias() const {
  double sum = 0.0;
  for (const VariableMarginal& row : rows)
    sum += row.magnetization();
  return sum;
}

double MarginalTable::mean_magnetization() const {
  return rows.empty() ? 0.0 : total_bias() / static_cast<double>(rows.size());
}

MarginalTable marginalize(const FactorGraph& g, const MessageState& msgs,
                          WarningPolarity polarity) {
  MarginalTable table;
  table.rows.reserve(g.live_var_count());
  for (Var v = 1; v <= g.n_vars(); ++v) {
    if (!g.var_live(v))
      continue;
    double prod_pos = 1.0;
    double prod_neg = 1.0;
    for (EdgeId e : g.var_edges(v)) {
      if (!g.edge_live(e))
        continue;
      (g.edge(e).negated ? prod_neg : prod_pos) *= 1.0 - msgs[e];
    }
    double w1 = (1.0 - prod_pos) * prod_neg;
    double w0 = (1.0 - prod_neg) * prod_pos;
    if (polarity == WarningPolarity::away_from_literal)
      std::swap(w0, w1);
    const double ws = prod_pos * prod_neg;
    const double norm = w0 + w1 + ws;

    VariableMarginal row{v, 0.0, 0.0, 1.0};
    if (norm > 0.0) {
      row.mu0 = w0 / norm;
      row.mu1 = w1 / norm;
      row.mu_star = ws / norm;
    } else if (!table.contradiction) {
      table.contradiction = true;
      table.contradiction_var = v;
    }
    table.rows.push_back(row);
  }
  return table;
}

} // namespace streamsp
