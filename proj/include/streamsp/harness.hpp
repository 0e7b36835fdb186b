#pragma once

#include "streamsp/gen.hpp"
#include "streamsp/oracle.hpp"
#include "streamsp/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamsp {

enum class Algorithm { sid, sis };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct SweepSpec {
  InstanceKind kind = InstanceKind::ksat;
  std::uint32_t k = 3;
  Var n = 1000;
  std::vector<double> alphas;
  int instances_per_alpha = 100;
  std::vector<Algorithm> algs = {Algorithm::sid, Algorithm::sis};
  std::vector<int> t_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int train_instances = 20;
  std::uint64_t base_seed = 1;
  unsigned parallelism = 1;
  double budget_seconds = 60.0;
  SolverConfig solver; // iteration_threshold and seed are set per run

  void validate() const; // throws std::invalid_argument
};

struct SweepRow {
  Algorithm alg = Algorithm::sid;
  std::uint32_t k = 3;
  Var n = 0;
  double alpha = 0.0;
  int t_used = 0;
  int successes = 0;
  int trials = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int non_convergence = 0;
  int local_search_timeout = 0;
  int contradiction = 0;
  int unsat_claim = 0;
  double mean_wall_seconds = 0.0;
};

struct InstanceRecord {
  Algorithm alg = Algorithm::sid;
  double alpha = 0.0;
  int index = 0;
  int t_used = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t solver_seed = 0;
  SolveStatus status = SolveStatus::failure;
  FailureKind failure = FailureKind::none;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<InstanceRecord> instances;
  std::map<double, int> tuned_t; // per alpha, present when SIS ran
};

// Instance seeds do not depend on the algorithm, so SID and SIS always see
// identical formulas; training and test instances use disjoint seed streams.
std::uint64_t instance_seed(std::uint64_t base, double alpha, int index, bool training);
std::uint64_t solver_seed(std::uint64_t base, double alpha, int index, bool training);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval.
Interval wilson_interval(int successes, int trials, double z = 1.96);

// One-sided exact McNemar test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2),
// where wins/losses count discordant pairs in the hypothesized direction.
double mcnemar_one_sided(int wins, int losses);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Best T per alpha on `train_instances` fresh instances (ties -> smaller T).
std::map<double, int> tune_T(const SweepSpec& spec);

// Solve one generated instance; exposed for reproducing single rows.
InstanceRecord run_instance(const SweepSpec& spec, Algorithm alg, double alpha, int index,
                            int t_used, bool training);

SweepResult run_sweep(const SweepSpec& spec);

// Per algorithm, the largest alpha whose success rate exceeds `bar`;
// nullopt means no alpha on the grid qualifies.
std::map<Algorithm, std::optional<double>> algorithmic_threshold(const std::vector<SweepRow>& rows,
                                                                 double bar = 0.05);

constexpr std::size_t kHistogramBins = 20;

struct CalibrationRow {
  int round = 0;
  RoundAction action = RoundAction::decimate;
  std::size_t live_vars = 0;
  std::uint64_t solution_count = 0;
  double calibration = 1.0;
  double mean_hamming = 0.0;
  double mean_magnetization = 0.0;
  std::array<double, kHistogramBins> histogram{}; // fraction of live vars per bin
  bool truncated = false; // the current formula has no solutions left
};

struct CalibrationTrace {
  std::vector<CalibrationRow> rows;
  SolveOutcome outcome;
  bool truncated = false;
};

// Runs SIS and, after each round's marginals, enumerates the current formula
// (original + streamlining clauses + fixed variables) to record calibration,
// exact mean pairwise Hamming distance and a magnetization histogram.
CalibrationTrace calibration_trace(const Formula& f, const SolverConfig& cfg, double bar = 0.9,
                                   Var cap_n = 26);

std::array<double, kHistogramBins> magnetization_histogram(const MarginalTable& m);

// CSV with a fixed header; column order is part of the interface.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_instance_csv(std::ostream& out, const std::vector<InstanceRecord>& records);
void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows,
                           int instance = 0, bool header = true);

// Plain "key = value" lines; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values_file(const std::string& path);

// Applies solver keys (r_frac, T, counter_threshold, ...) onto `cfg`.
// Unknown keys are left for the caller; returns the keys consumed.
std::vector<std::string> apply_solver_keys(const KeyValues& kv, SolverConfig& cfg);

// Throws std::invalid_argument on unknown keys or malformed values.
SweepSpec sweep_spec_from_config(const KeyValues& kv);

struct CalibrationSpec {
  std::uint32_t k = 3;
  Var n = 24;
  double alpha = 4.0;
  int instances = 20;
  std::uint64_t base_seed = 1;
  double bar = 0.9;
  Var cap_n = 26;
  SolverConfig solver;
};
CalibrationSpec calibration_spec_from_config(const KeyValues& kv);

struct SeededFormula {
  std::uint64_t seed = 0;
  Formula formula;
};

// The first `spec.instances` generated k-SAT formulas that the oracle finds
// satisfiable, drawn from consecutive derived seeds.
std::vector<SeededFormula> satisfiable_instances(const CalibrationSpec& spec);

} // namespace streamsp
