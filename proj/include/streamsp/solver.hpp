#pragma once

#include "streamsp/branching.hpp"
#include "streamsp/cnf.hpp"
#include "streamsp/factor_graph.hpp"
#include "streamsp/sp.hpp"
#include "streamsp/walksat.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace streamsp {

struct SolverConfig {
  double r_frac = 0.01;
  RBasis r_basis = RBasis::original_n;
  int iteration_threshold = 0; // streamlining rounds before decimation (T)
  std::uint32_t counter_threshold = 2;
  double epsilon_frac = 0.01;
  Pairing pairing = Pairing::highest_with_lowest;
  SpConfig sp;
  WalkSatParams ws; // ws.seed is ignored; local search seeds derive from `seed`
  std::uint64_t seed = 0;
  std::optional<std::chrono::duration<double>> time_budget;

  void validate() const; // throws std::invalid_argument
};

enum class SolveStatus { sat, unsat_claim, failure };
enum class FailureKind { none, non_convergence, local_search_timeout, contradiction };

std::string_view to_string(SolveStatus s);
std::string_view to_string(FailureKind k);

enum class RoundAction { streamline, decimate, local_search };

struct RoundRecord {
  int round = 0;
  RoundAction action = RoundAction::decimate;
  std::size_t live_vars = 0;
  std::size_t live_clauses = 0;
  std::size_t live_edges = 0;
  int sweeps = 0;
  double total_bias = 0.0;
  std::size_t clauses_added = 0;
  std::size_t vars_fixed = 0; // including implied ones

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct SolveStats {
  int rounds = 0;
  std::size_t streamlining_clauses = 0;
  std::size_t vars_fixed = 0;
  int sweeps = 0;
  std::uint64_t flips = 0;
  double wall_seconds = 0.0;
  std::vector<RoundRecord> trace;
};

// An UnsatClaim is heuristic, never a proof: it reports that SP or unit
// propagation met a contradiction before any branching decision was made.
// A contradiction reached after branching only means the branch lost all
// solutions and is reported as Failure(contradiction).
struct SolveOutcome {
  SolveStatus status = SolveStatus::failure;
  FailureKind failure = FailureKind::none;
  Assignment assignment; // SAT only; verified against the original formula
  SolveStats stats;

  bool is_sat() const { return status == SolveStatus::sat; }
};

// Called after each round's marginals are computed and before branching.
struct RoundView {
  int round;
  const FactorGraph& graph;
  const MarginalTable& marginals;
};
using RoundObserver = std::function<void(const RoundView&)>;

// Survey inspired decimation: SP, marginals, then either local search (once
// the total bias drops below epsilon) or fixing the top-R variables.
SolveOutcome solve_sid(const Formula& f, const SolverConfig& cfg,
                       const RoundObserver& observer = {});

// Survey inspired streamlining: the first `iteration_threshold` rounds add
// paired 2-clauses instead of fixing variables; later rounds decimate.
SolveOutcome solve_sis(const Formula& f, const SolverConfig& cfg,
                       const RoundObserver& observer = {});

// Seed of the generator behind message initialization and sweep orders for a
// solve with `cfg.seed`; lets callers replay the first SP run of a solve.
std::uint64_t message_seed(const SolverConfig& cfg);

struct PreprocessResult {
  Formula formula; // original clauses followed by the streamlining clauses
  bool sp_failed = false;
  int rounds_done = 0;
};

// Runs `rounds` SP + streamlining rounds and returns the augmented formula
// for a downstream solver. No decimation or local search. rounds >= 1.
PreprocessResult streamline_preprocess(const Formula& f, const SolverConfig& cfg, int rounds);

} // namespace streamsp
