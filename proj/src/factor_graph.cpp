#include "streamsp/factor_graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace streamsp {

FactorGraph::FactorGraph(const Formula& f)
    : n_vars_(f.n_vars()), var_edges_(f.n_vars() + 1), assignment_(f.n_vars()) {
  std::size_t total = 0;
  for (const Clause& c : f.clauses())
    total += c.size();
  edges_.reserve(total);
  edge_live_.reserve(total);
  clause_edges_.reserve(f.n_clauses());
  for (const Clause& c : f.clauses())
    add_clause(c);
}

ClauseId FactorGraph::add_clause(const Clause& clause) {
  for (const Literal& lit : clause.literals()) {
    if (lit.var == 0 || lit.var > n_vars_)
      throw FormulaError("clause variable " + std::to_string(lit.var) + " out of range");
    if (!var_live(lit.var))
      throw FormulaError("cannot add a clause over assigned variable " + std::to_string(lit.var));
  }
  const auto c = static_cast<ClauseId>(clause_edges_.size());
  auto& adj = clause_edges_.emplace_back();
  adj.reserve(clause.size());
  for (const Literal& lit : clause.literals()) {
    const auto e = static_cast<EdgeId>(edges_.size());
    edges_.push_back({c, lit.var, lit.negated});
    edge_live_.push_back(1);
    adj.push_back(e);
    var_edges_[lit.var].push_back(e);
  }
  clause_live_.push_back(1);
  live_degree_.push_back(static_cast<std::uint32_t>(clause.size()));
  clause_origin_.push_back(clause.origin());
  ++live_clauses_;
  live_edges_ += clause.size();
  return c;
}

void FactorGraph::kill_edge(EdgeId e) {
  edge_live_[e] = 0;
  --live_degree_[edges_[e].clause];
  --live_edges_;
}

void FactorGraph::kill_clause(ClauseId c) {
  for (EdgeId e : clause_edges_[c]) {
    if (edge_live_[e]) {
      edge_live_[e] = 0;
      --live_edges_;
    }
  }
  live_degree_[c] = 0;
  clause_live_[c] = 0;
  --live_clauses_;
}

FactorGraph::Residual FactorGraph::residual() const {
  std::vector<Var> local(n_vars_ + 1, 0);
  Residual out;
  std::vector<Clause> clauses;
  clauses.reserve(live_clauses_);
  for (ClauseId c = 0; c < clause_edges_.size(); ++c) {
    if (!clause_live_[c])
      continue;
    std::vector<Literal> lits;
    for (EdgeId e : clause_edges_[c]) {
      if (!edge_live_[e])
        continue;
      const Edge& ed = edges_[e];
      if (local[ed.var] == 0) {
        out.vars.push_back(ed.var);
        local[ed.var] = static_cast<Var>(out.vars.size());
      }
      lits.emplace_back(local[ed.var], ed.negated);
    }
    clauses.emplace_back(std::move(lits), clause_origin_[c]);
  }
  out.formula = Formula(static_cast<Var>(out.vars.size()), std::move(clauses));
  return out;
}

Formula FactorGraph::current_formula(const Formula& original) const {
  std::vector<Clause> clauses(original.clauses().begin(), original.clauses().end());
  for (ClauseId c = static_cast<ClauseId>(original.n_clauses()); c < clause_edges_.size(); ++c) {
    std::vector<Literal> lits;
    for (EdgeId e : clause_edges_[c])
      lits.push_back(edges_[e].literal());
    clauses.emplace_back(std::move(lits), clause_origin_[c]);
  }
  for (Var v = 1; v <= n_vars_; ++v) {
    if (auto value = assignment_.get(v))
      clauses.emplace_back(std::vector<Literal>{Literal(v, !*value)});
  }
  return Formula(n_vars_, std::move(clauses));
}

bool FactorGraph::check_consistency() const {
  std::vector<std::uint32_t> seen_in_clause(edges_.size(), 0);
  std::vector<std::uint32_t> seen_in_var(edges_.size(), 0);
  std::size_t live_edges = 0;
  std::size_t live_clauses = 0;
  for (ClauseId c = 0; c < clause_edges_.size(); ++c) {
    std::uint32_t degree = 0;
    for (EdgeId e : clause_edges_[c]) {
      if (e >= edges_.size() || edges_[e].clause != c)
        return false;
      ++seen_in_clause[e];
      if (edge_live_[e])
        ++degree;
    }
    if (degree != live_degree_[c])
      return false;
    if (!clause_live_[c] && degree != 0)
      return false;
    live_clauses += clause_live_[c];
    live_edges += degree;
  }
  for (Var v = 1; v <= n_vars_; ++v) {
    for (EdgeId e : var_edges_[v]) {
      if (e >= edges_.size() || edges_[e].var != v)
        return false;
      ++seen_in_var[e];
      if (edge_live_[e] && !var_live(v))
        return false;
    }
  }
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    if (seen_in_clause[e] != 1 || seen_in_var[e] != 1)
      return false;
  }
  return live_edges == live_edges_ && live_clauses == live_clauses_;
}

class Propagator {
public:
  explicit Propagator(FactorGraph& g) : g_(g) {}

  // Assigns and enqueues; returns false on a conflict with an earlier fix.
  bool enqueue(Fix fix) {
    if (auto current = g_.assignment_.get(fix.var))
      return *current == fix.value;
    g_.assignment_.set(fix.var, fix.value);
    queue_.push_back(fix);
    result_.assigned.push_back(fix);
    return true;
  }

  PropagationResult run() {
    while (!queue_.empty() && !result_.contradiction) {
      const Fix fix = queue_.front();
      queue_.pop_front();
      process(fix);
    }
    return std::move(result_);
  }

  void fail() { result_.contradiction = true; }

private:
  void process(Fix fix) {
    for (EdgeId e : g_.var_edges_[fix.var]) {
      if (!g_.edge_live_[e])
        continue;
      const Edge& edge = g_.edges_[e];
      if (edge.literal().is_satisfied_by(fix.value)) {
        g_.kill_clause(edge.clause);
        continue;
      }
      g_.kill_edge(e);
      const std::uint32_t degree = g_.live_degree_[edge.clause];
      if (degree == 0) {
        fail();
        return;
      }
      if (degree == 1) {
        // The remaining variable may already carry a pending fix; if that fix
        // falsifies the literal, processing it will empty this clause.
        for (EdgeId other : g_.clause_edges_[edge.clause]) {
          if (!g_.edge_live_[other])
            continue;
          const Edge& unit = g_.edges_[other];
          if (g_.var_live(unit.var))
            enqueue({unit.var, unit.literal().satisfying_value()});
          break;
        }
      }
    }
  }

  FactorGraph& g_;
  std::deque<Fix> queue_;
  PropagationResult result_;
};

PropagationResult unit_propagate(FactorGraph& g, std::span<const Fix> fixes) {
  for (const Fix& fix : fixes) {
    if (fix.var == 0 || fix.var > g.n_vars())
      throw std::invalid_argument("fix on out-of-range variable " + std::to_string(fix.var));
    if (!g.var_live(fix.var))
      throw std::invalid_argument("fix on assigned variable " + std::to_string(fix.var));
  }
  Propagator prop(g);
  for (const Fix& fix : fixes) {
    if (!prop.enqueue(fix)) {
      prop.fail();
      break;
    }
  }
  return prop.run();
}

PropagationResult propagate_units(FactorGraph& g) {
  Propagator prop(g);
  for (ClauseId c = 0; c < g.clause_slots(); ++c) {
    if (!g.clause_live(c) || g.live_degree(c) != 1)
      continue;
    for (EdgeId e : g.clause_edges(c)) {
      if (!g.edge_live(e))
        continue;
      const Edge& unit = g.edge(e);
      if (!prop.enqueue({unit.var, unit.literal().satisfying_value()}))
        prop.fail();
      break;
    }
  }
  return prop.run();
}

} // namespace streamsp
