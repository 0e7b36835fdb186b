#pragma once

#include "streamsp/cnf.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace streamsp {

using EdgeId = std::uint32_t;

struct Edge {
  ClauseId clause = 0;
  Var var = 0;
  bool negated = false;

  Literal literal() const { return {var, negated}; }
};

struct Fix {
  Var var = 0;
  bool value = false;

  friend bool operator==(const Fix&, const Fix&) = default;
};

// Bipartite clause/variable graph. Nodes and edges are never erased; they are
// switched off with live flags, and adjacency lists are filtered on the fly.
// This lets decimation (deletion) and streamlining (insertion) share one
// structure without rebuilding adjacency.
//
// A variable is live iff it is unassigned. A live clause is one not yet
// satisfied; its live edges are the literals whose variables are unassigned.
class FactorGraph {
public:
  explicit FactorGraph(const Formula& f);

  Var n_vars() const { return n_vars_; }
  std::size_t clause_slots() const { return clause_edges_.size(); }
  std::size_t edge_slots() const { return edges_.size(); }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  bool edge_live(EdgeId e) const { return edge_live_[e] != 0; }
  bool clause_live(ClauseId c) const { return clause_live_[c] != 0; }
  bool var_live(Var v) const { return !assignment_.is_assigned(v); }
  ClauseOrigin clause_origin(ClauseId c) const { return clause_origin_[c]; }

  // All edge ids incident to a node, including dead ones. Filter with edge_live.
  std::span<const EdgeId> clause_edges(ClauseId c) const { return clause_edges_[c]; }
  std::span<const EdgeId> var_edges(Var v) const { return var_edges_[v]; }

  std::uint32_t live_degree(ClauseId c) const { return live_degree_[c]; }
  std::size_t live_clause_count() const { return live_clauses_; }
  std::size_t live_edge_count() const { return live_edges_; }
  std::size_t live_var_count() const { return n_vars_ - assignment_.assigned_count(); }

  const Assignment& assignment() const { return assignment_; }

  // Insert a clause over live variables. Literals on assigned variables are
  // rejected. Returns the new clause id.
  ClauseId add_clause(const Clause& clause);

  // Live clauses restricted to live literals, renumbered compactly. The
  // mapping `vars[k]` gives the original variable of residual variable k+1.
  struct Residual {
    Formula formula;
    std::vector<Var> vars;
  };
  Residual residual() const;

  // Original clauses plus streamlining clauses added so far plus one unit
  // clause per assigned variable. Its solution set is exactly the set of
  // assignments consistent with the current search state.
  Formula current_formula(const Formula& original) const;

  // Verifies adjacency symmetry, live-degree bookkeeping and the
  // "dead clauses have no live edges" invariant.
  bool check_consistency() const;

private:
  friend class Propagator;

  void kill_edge(EdgeId e);
  void kill_clause(ClauseId c);

  Var n_vars_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint8_t> edge_live_;
  std::vector<std::vector<EdgeId>> clause_edges_;
  std::vector<std::vector<EdgeId>> var_edges_; // indexed by Var, slot 0 unused
  std::vector<std::uint8_t> clause_live_;
  std::vector<std::uint32_t> live_degree_;
  std::vector<ClauseOrigin> clause_origin_;
  std::size_t live_clauses_ = 0;
  std::size_t live_edges_ = 0;
  Assignment assignment_;
};

struct PropagationResult {
  bool contradiction = false;
  // Every assignment made, in order: the requested fixes first, then implied ones.
  std::vector<Fix> assigned;
};

// Applies `fixes` and propagates unit clauses to fixpoint. Satisfied clauses
// are deleted with all their edges; falsified literals lose their edge. A
// clause left with no live literal, or two conflicting fixes, yields a
// contradiction; the graph is then left part-way through propagation and
// should be discarded. Throws std::invalid_argument if a fixed variable is
// already assigned.
PropagationResult unit_propagate(FactorGraph& g, std::span<const Fix> fixes);

// Propagates the unit clauses already present in the graph.
PropagationResult propagate_units(FactorGraph& g);

} // namespace streamsp
