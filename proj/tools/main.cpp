// streamsp command-line front end. Exit codes for `solve`: 10 SAT,
// 20 UnsatClaim, 30 failure. Other subcommands return 0 on success and 1 on
// input or usage errors.

#include "streamsp/gen.hpp"
#include "streamsp/harness.hpp"
#include "streamsp/oracle.hpp"
#include "streamsp/rng.hpp"
#include "streamsp/solver.hpp"
#include "streamsp/walksat.hpp"
#include "streamsp/xor_system.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace streamsp;

constexpr int kExitSat = 10;
constexpr int kExitUnsatClaim = 20;
constexpr int kExitUnknown = 30;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_model(std::ostream& out, const Assignment& a) {
  out << "v";
  for (Var v = 1; v <= a.n_vars(); ++v)
    out << ' ' << (a.value(v) ? static_cast<long>(v) : -static_cast<long>(v));
  out << " 0\n";
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn> void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  fn(out);
}

void dump_messages(const std::string& path, const FactorGraph& g, const MessageState& msgs) {
  with_output(path, [&](std::ostream& out) {
    out << "edge,clause,var,negated,eta\n";
    out.precision(17);
    for (EdgeId e = 0; e < g.edge_slots(); ++e) {
      if (!g.edge_live(e))
        continue;
      const Edge& ed = g.edge(e);
      out << e << ',' << ed.clause << ',' << ed.var << ',' << (ed.negated ? 1 : 0) << ','
          << msgs[e] << '\n';
    }
  });
}

struct SolverFlags {
  double r_frac = 0.01;
  double epsilon_frac = 0.01;
  std::uint32_t counter_threshold = 2;
  std::string pairing = "highest_lowest";
  std::string polarity = "toward";
  double budget = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--r-frac", r_frac, "candidates per round as a fraction of n");
    app->add_option("--epsilon-frac", epsilon_frac, "paramagnetic bias threshold per live var");
    app->add_option("--counter-threshold", counter_threshold, "streamlining clauses per var");
    app->add_option("--pairing", pairing, "highest_lowest or blocks")
        ->check(CLI::IsMember({"highest_lowest", "blocks"}));
    app->add_option("--polarity", polarity, "warning polarity: toward or away")
        ->check(CLI::IsMember({"toward", "away"}));
    app->add_option("--budget", budget, "wall-clock budget in seconds (0 = none)");
  }

  void apply(SolverConfig& cfg) const {
    cfg.r_frac = r_frac;
    cfg.epsilon_frac = epsilon_frac;
    cfg.counter_threshold = counter_threshold;
    cfg.pairing = pairing == "blocks" ? Pairing::blocks : Pairing::highest_with_lowest;
    cfg.sp.polarity =
        polarity == "away" ? WarningPolarity::away_from_literal : WarningPolarity::toward_literal;
    if (budget > 0.0)
      cfg.time_budget = std::chrono::duration<double>(budget);
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Survey propagation toolkit: decimation and streamlining solvers"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random k-SAT or 2-XORSAT instance");
  GenSpec spec;
  spec.n = 100;
  spec.alpha = 4.0;
  std::string kind = "ksat";
  std::string gen_out;
  gen->add_option("--n", spec.n, "variables")->required();
  gen->add_option("--alpha", spec.alpha, "clauses per variable")->required();
  gen->add_option("--k", spec.k, "clause length (ksat)");
  gen->add_option("--seed", spec.seed, "64-bit seed");
  gen->add_option("--kind", kind, "ksat or xor2")->check(CLI::IsMember({"ksat", "xor2"}));
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "run SID or SIS on a DIMACS file");
  std::string alg = "sis";
  int t_threshold = 10;
  std::uint64_t solve_seed = 0;
  std::string solve_file, dump_path;
  SolverFlags solve_flags;
  solve->add_option("--alg", alg, "sid or sis")->check(CLI::IsMember({"sid", "sis"}));
  solve->add_option("--T", t_threshold, "streamlining rounds before decimation (sis)");
  solve->add_option("--seed", solve_seed, "solver seed");
  solve->add_option("--dump-messages", dump_path,
                    "write the converged messages of the first round as CSV");
  solve->add_option("file", solve_file, "DIMACS CNF")->required();
  solve_flags.attach(solve);

  // streamline
  auto* streamline = app.add_subcommand("streamline", "emit the formula plus streamlining clauses");
  int rounds = 1;
  std::uint64_t streamline_seed = 0;
  std::string streamline_file, streamline_out;
  SolverFlags streamline_flags;
  streamline->add_option("--rounds", rounds, "SP + streamlining rounds")->required();
  streamline->add_option("--seed", streamline_seed, "solver seed");
  streamline->add_option("-o,--output", streamline_out, "output file (default stdout)");
  streamline->add_option("file", streamline_file, "DIMACS CNF")->required();
  streamline_flags.attach(streamline);

  // walksat
  auto* ws = app.add_subcommand("walksat", "run WalkSAT on a DIMACS file");
  WalkSatParams ws_params;
  std::string ws_file;
  ws->add_option("--noise", ws_params.noise, "random-walk probability");
  ws->add_option("--max-flips", ws_params.max_flips, "flips per try (0 = 100 n)");
  ws->add_option("--tries", ws_params.tries, "restarts");
  ws->add_option("--seed", ws_params.seed, "seed");
  ws->add_option("file", ws_file, "DIMACS CNF")->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact enumeration and the 2-XORSAT decision oracle");
  std::string oracle_mode;
  std::string oracle_file;
  Var cap_n = 26;
  oracle->add_option("mode", oracle_mode, "count, marginals or xor")
      ->required()
      ->check(CLI::IsMember({"count", "marginals", "xor"}));
  oracle->add_option("file", oracle_file, "DIMACS CNF")->required();
  oracle->add_option("--cap-n", cap_n, "refuse formulas with more variables");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "success-rate sweep over alpha (CSV)");
  std::string sweep_config, sweep_out, sweep_instances;
  sweep->add_option("--config", sweep_config, "key=value config file")->required();
  sweep->add_option("-o,--output", sweep_out, "summary CSV (default stdout)");
  sweep->add_option("--instances-csv", sweep_instances, "per-instance CSV");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "per-round calibration traces (CSV)");
  std::string calibrate_config, calibrate_out;
  calibrate->add_option("--config", calibrate_config, "key=value config file")->required();
  calibrate->add_option("-o,--output", calibrate_out, "CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    spec.kind = kind == "xor2" ? InstanceKind::xor2sat : InstanceKind::ksat;
    if (spec.kind == InstanceKind::xor2sat)
      spec.k = 2;
    with_output(gen_out, [&](std::ostream& out) {
      if (spec.kind == InstanceKind::ksat) {
        emit_dimacs(gen_ksat(spec), out);
      } else {
        const XorInstance x = gen_2xorsat(spec);
        out << xor_comment_lines(x.system);
        emit_dimacs(x.formula, out);
      }
    });
    return 0;
  }

  if (*solve) {
    const Formula f = read_dimacs_file(solve_file);
    SolverConfig cfg;
    solve_flags.apply(cfg);
    cfg.seed = solve_seed;
    cfg.iteration_threshold = t_threshold;
    bool dumped = false;
    RoundObserver observer;
    if (!dump_path.empty()) {
      // The observer only sees marginals; re-running SP on the round-0 graph
      // with the solver's message seed reproduces the first converged state.
      observer = [&](const RoundView& view) {
        if (dumped)
          return;
        dumped = true;
        MessageState msgs;
        Rng rng(message_seed(cfg));
        init_messages(view.graph, rng, msgs);
        run_sp(view.graph, cfg.sp, rng, msgs);
        dump_messages(dump_path, view.graph, msgs);
      };
    }
    const SolveOutcome out = alg == "sid" ? solve_sid(f, cfg, observer) : solve_sis(f, cfg, observer);
    std::cout << "c rounds " << out.stats.rounds << " streamlining_clauses "
              << out.stats.streamlining_clauses << " vars_fixed " << out.stats.vars_fixed
              << " sweeps " << out.stats.sweeps << " flips " << out.stats.flips << " wall_s "
              << out.stats.wall_seconds << '\n';
    switch (out.status) {
    case SolveStatus::sat:
      std::cout << "s SATISFIABLE\n";
      print_model(std::cout, out.assignment);
      return kExitSat;
    case SolveStatus::unsat_claim:
      std::cout << "c unsat claim is heuristic: SP or propagation hit a contradiction before "
                   "any branching\n";
      std::cout << "s UNSATISFIABLE\n";
      return kExitUnsatClaim;
    case SolveStatus::failure:
      std::cout << "c failure " << to_string(out.failure) << '\n';
      std::cout << "s UNKNOWN\n";
      return kExitUnknown;
    }
    return kExitUnknown;
  }

  if (*streamline) {
    const Formula f = read_dimacs_file(streamline_file);
    SolverConfig cfg;
    streamline_flags.apply(cfg);
    cfg.seed = streamline_seed;
    const PreprocessResult res = streamline_preprocess(f, cfg, rounds);
    if (res.sp_failed)
      std::cerr << "warning: SP did not converge; stopped after " << res.rounds_done
                << " rounds\n";
    with_output(streamline_out, [&](std::ostream& out) {
      out << "c streamlining rounds " << res.rounds_done << '\n';
      emit_dimacs(res.formula, out);
    });
    return 0;
  }

  if (*ws) {
    const Formula f = read_dimacs_file(ws_file);
    const WalkSatResult res = walksat(f, ws_params);
    std::cout << "c flips " << res.flips << " tries " << res.tries_used << '\n';
    if (res.found) {
      std::cout << "s SATISFIABLE\n";
      print_model(std::cout, res.assignment);
      return kExitSat;
    }
    std::cout << "s UNKNOWN\n";
    return kExitUnknown;
  }

  if (*oracle) {
    const std::string text = slurp(oracle_file);
    const Formula f = parse_dimacs(text);
    if (oracle_mode == "xor") {
      const std::optional<XorSystem> sys = parse_xor_comments(text);
      if (!sys)
        throw std::runtime_error("no 'c x i j p' parity lines in " + oracle_file);
      const EnumerationResult e = enumerate(f, {cap_n, 0});
      const bool parity = xor2_satisfiable(*sys);
      std::cout << "parity_satisfiable,cnf_count,agree\n"
                << (parity ? 1 : 0) << ',' << e.count << ',' << ((e.count > 0) == parity ? 1 : 0)
                << '\n';
      return 0;
    }
    const EnumerationResult e = enumerate(f, {cap_n, 0});
    if (oracle_mode == "count") {
      std::cout << "n,count\n" << f.n_vars() << ',' << e.count << '\n';
      return 0;
    }
    std::cout << "var,p_true\n";
    std::cout.precision(17);
    for (Var v = 1; v <= f.n_vars(); ++v) {
      std::cout << v << ',';
      if (e.count > 0)
        std::cout << e.marginal(v);
      std::cout << '\n';
    }
    return 0;
  }

  if (*sweep) {
    const SweepSpec s = sweep_spec_from_config(read_key_values_file(sweep_config));
    const SweepResult res = run_sweep(s);
    with_output(sweep_out, [&](std::ostream& out) { write_sweep_csv(out, res.rows); });
    if (!sweep_instances.empty())
      with_output(sweep_instances,
                  [&](std::ostream& out) { write_instance_csv(out, res.instances); });
    return 0;
  }

  if (*calibrate) {
    const CalibrationSpec s = calibration_spec_from_config(read_key_values_file(calibrate_config));
    const std::vector<SeededFormula> formulas = satisfiable_instances(s);
    with_output(calibrate_out, [&](std::ostream& out) {
      for (std::size_t i = 0; i < formulas.size(); ++i) {
        SolverConfig cfg = s.solver;
        cfg.seed = derive_seed({s.base_seed, formulas[i].seed});
        const CalibrationTrace trace = calibration_trace(formulas[i].formula, cfg, s.bar, s.cap_n);
        write_calibration_csv(out, trace.rows, static_cast<int>(i), i == 0);
      }
    });
    return 0;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
