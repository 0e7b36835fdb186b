#include "streamsp/solver.hpp"

#include "streamsp/rng.hpp"

#include <stdexcept>

namespace streamsp {

void SolverConfig::validate() const {
  if (!(r_frac > 0.0 && r_frac <= 1.0))
    throw std::invalid_argument("r_frac must lie in (0, 1]");
  if (iteration_threshold < 0)
    throw std::invalid_argument("iteration threshold T must be >= 0");
  if (!(epsilon_frac > 0.0))
    throw std::invalid_argument("epsilon_frac must be positive");
  sp.validate();
  ws.validate();
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::sat:
    return "sat";
  case SolveStatus::unsat_claim:
    return "unsat_claim";
  case SolveStatus::failure:
    return "failure";
  }
  return "?";
}

std::string_view to_string(FailureKind k) {
  switch (k) {
  case FailureKind::none:
    return "none";
  case FailureKind::non_convergence:
    return "non_convergence";
  case FailureKind::local_search_timeout:
    return "local_search_timeout";
  case FailureKind::contradiction:
    return "contradiction";
  }
  return "?";
}

namespace {

// Stream tags for seed derivation.
constexpr std::uint64_t kMessageStream = 0x5350;   // "SP"
constexpr std::uint64_t kLocalSearchStream = 0x5753; // "WS"

class Search {
public:
  Search(const Formula& f, const SolverConfig& cfg, int threshold, const RoundObserver& observer)
      : f_(f), cfg_(cfg), threshold_(threshold), observer_(observer), graph_(f),
        rng_(message_seed(cfg)), counters_(f.n_vars(), cfg.counter_threshold),
        start_(std::chrono::steady_clock::now()) {
    if (cfg.time_budget)
      deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               *cfg.time_budget);
  }

  SolveOutcome run() {
    const PropagationResult units = propagate_units(graph_);
    out_.stats.vars_fixed += units.assigned.size();
    if (units.contradiction)
      return finish(SolveStatus::unsat_claim, FailureKind::none);

    init_messages(graph_, rng_, msgs_);
    for (int round = 0;; ++round) {
      RoundRecord rec;
      rec.round = round;
      rec.live_vars = graph_.live_var_count();
      rec.live_clauses = graph_.live_clause_count();
      rec.live_edges = graph_.live_edge_count();

      const SpResult sp = run_sp(graph_, cfg_.sp, rng_, msgs_, deadline_);
      rec.sweeps = sp.sweeps;
      out_.stats.sweeps += sp.sweeps;
      if (sp.status == SpStatus::contradiction)
        return contradiction(rec);
      if (sp.status == SpStatus::unconverged) {
        record(rec);
        return finish(SolveStatus::failure, FailureKind::non_convergence);
      }

      const MarginalTable marginals = marginalize(graph_, msgs_, cfg_.sp.polarity);
      if (marginals.contradiction)
        return contradiction(rec);
      rec.total_bias = marginals.total_bias();
      if (observer_)
        observer_(RoundView{round, graph_, marginals});

      const double epsilon = cfg_.epsilon_frac * static_cast<double>(rec.live_vars);
      if (rec.live_edges == 0 || rec.total_bias < epsilon) {
        rec.action = RoundAction::local_search;
        record(rec);
        break;
      }

      const std::size_t basis =
          cfg_.r_basis == RBasis::original_n ? f_.n_vars() : rec.live_vars;
      const std::size_t r = candidates_per_round(cfg_.r_frac, basis);

      if (round < threshold_) {
        const std::vector<Clause> added =
            streamline_step(graph_, marginals, r, counters_, cfg_.pairing);
        if (!added.empty()) {
          extend_messages(graph_, rng_, msgs_);
          branched_ = true;
          rec.action = RoundAction::streamline;
          rec.clauses_added = added.size();
          out_.stats.streamlining_clauses += added.size();
          record(rec);
          continue;
        }
      }

      const std::vector<Fix> fixes = decimate_step(marginals, r);
      if (fixes.empty()) {
        rec.action = RoundAction::local_search;
        record(rec);
        break;
      }
      branched_ = true;
      const PropagationResult prop = unit_propagate(graph_, fixes);
      rec.action = RoundAction::decimate;
      rec.vars_fixed = prop.assigned.size();
      out_.stats.vars_fixed += prop.assigned.size();
      record(rec);
      if (prop.contradiction)
        return finish(SolveStatus::failure, FailureKind::contradiction);
    }
    return local_search();
  }

private:
  void record(const RoundRecord& rec) {
    out_.stats.trace.push_back(rec);
    out_.stats.rounds = static_cast<int>(out_.stats.trace.size());
  }

  SolveOutcome contradiction(const RoundRecord& rec) {
    record(rec);
    if (branched_)
      return finish(SolveStatus::failure, FailureKind::contradiction);
    return finish(SolveStatus::unsat_claim, FailureKind::none);
  }

  SolveOutcome local_search() {
    const FactorGraph::Residual residual = graph_.residual();
    WalkSatParams ws = cfg_.ws;
    ws.seed = derive_seed({cfg_.seed, kLocalSearchStream});
    const WalkSatResult found = walksat(residual.formula, ws, deadline_);
    out_.stats.flips = found.flips;
    if (!found.found)
      return finish(SolveStatus::failure, FailureKind::local_search_timeout);

    Assignment full(f_.n_vars());
    for (Var v = 1; v <= f_.n_vars(); ++v)
      full.set(v, graph_.assignment().get(v).value_or(false));
    for (Var local = 1; local <= residual.formula.n_vars(); ++local)
      full.set(residual.vars[local - 1], found.assignment.value(local));

    if (!evaluate(f_, full).satisfied)
      throw std::logic_error("assembled assignment fails the original formula");
    out_.assignment = std::move(full);
    return finish(SolveStatus::sat, FailureKind::none);
  }

  SolveOutcome finish(SolveStatus status, FailureKind kind) {
    out_.status = status;
    out_.failure = kind;
    out_.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(out_);
  }

  const Formula& f_;
  const SolverConfig& cfg_;
  int threshold_;
  const RoundObserver& observer_;
  FactorGraph graph_;
  Rng rng_;
  MessageState msgs_;
  StreamlineCounters counters_;
  std::chrono::steady_clock::time_point start_;
  Deadline deadline_;
  bool branched_ = false;
  SolveOutcome out_;
};

} // namespace

std::uint64_t message_seed(const SolverConfig& cfg) {
  return derive_seed({cfg.seed, kMessageStream});
}

SolveOutcome solve_sid(const Formula& f, const SolverConfig& cfg, const RoundObserver& observer) {
  cfg.validate();
  return Search(f, cfg, 0, observer).run();
}

SolveOutcome solve_sis(const Formula& f, const SolverConfig& cfg, const RoundObserver& observer) {
  cfg.validate();
  return Search(f, cfg, cfg.iteration_threshold, observer).run();
}

PreprocessResult streamline_preprocess(const Formula& f, const SolverConfig& cfg, int rounds) {
  cfg.validate();
  if (rounds < 1)
    throw std::invalid_argument("preprocessing needs at least one round");

  FactorGraph g(f);
  Rng rng(message_seed(cfg));
  MessageState msgs;
  init_messages(g, rng, msgs);
  StreamlineCounters counters(f.n_vars(), cfg.counter_threshold);
  const std::size_t r = candidates_per_round(cfg.r_frac, f.n_vars());

  PreprocessResult result;
  std::vector<Clause> added;
  for (int round = 0; round < rounds; ++round) {
    const SpResult sp = run_sp(g, cfg.sp, rng, msgs);
    if (sp.status != SpStatus::converged) {
      result.sp_failed = true;
      break;
    }
    const MarginalTable marginals = marginalize(g, msgs, cfg.sp.polarity);
    if (marginals.contradiction) {
      result.sp_failed = true;
      break;
    }
    std::vector<Clause> step = streamline_step(g, marginals, r, counters, cfg.pairing);
    if (step.empty())
      break;
    extend_messages(g, rng, msgs);
    added.insert(added.end(), step.begin(), step.end());
    result.rounds_done = round + 1;
  }
  result.formula = f.with_clauses(added);
  return result;
}

} // namespace streamsp
