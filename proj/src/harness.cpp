#include "streamsp/harness.hpp"

#include "streamsp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace streamsp {

std::string_view to_string(Algorithm a) { return a == Algorithm::sid ? "SID" : "SIS"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sid" || name == "SID")
    return Algorithm::sid;
  if (name == "sis" || name == "SIS")
    return Algorithm::sis;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (alphas.empty())
    throw std::invalid_argument("sweep needs at least one alpha");
  if (instances_per_alpha < 1)
    throw std::invalid_argument("instances_per_alpha must be >= 1");
  if (algs.empty())
    throw std::invalid_argument("sweep needs at least one algorithm");
  if (std::find(algs.begin(), algs.end(), Algorithm::sis) != algs.end()) {
    if (t_grid.empty())
      throw std::invalid_argument("SIS needs a nonempty T grid");
    if (t_grid.size() > 1 && train_instances < 1)
      throw std::invalid_argument("T tuning needs train_instances >= 1");
  }
  for (double a : alphas)
    GenSpec{n, a, k, 0, kind}.validate();
  solver.validate();
}

namespace {

constexpr std::uint64_t kTestStream = 0x54455354;  // "TEST"
constexpr std::uint64_t kTrainStream = 0x5452414e; // "TRAN"
constexpr std::uint64_t kInstanceTag = 1;
constexpr std::uint64_t kSolverTag = 2;

std::uint64_t seed_for(std::uint64_t base, double alpha, int index, bool training,
                       std::uint64_t tag) {
  return derive_seed({base, training ? kTrainStream : kTestStream, tag,
                      std::bit_cast<std::uint64_t>(alpha), static_cast<std::uint64_t>(index)});
}

// Runs jobs [0, count) on `workers` threads; each job writes only its own slot.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

Formula make_instance(const SweepSpec& spec, double alpha, std::uint64_t seed) {
  GenSpec gen{spec.n, alpha, spec.k, seed, spec.kind};
  if (spec.kind == InstanceKind::xor2sat)
    return gen_2xorsat(gen).formula;
  return gen_ksat(gen);
}

} // namespace

std::uint64_t instance_seed(std::uint64_t base, double alpha, int index, bool training) {
  return seed_for(base, alpha, index, training, kInstanceTag);
}

std::uint64_t solver_seed(std::uint64_t base, double alpha, int index, bool training) {
  return seed_for(base, alpha, index, training, kSolverTag);
}

Interval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0)
    return {0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double mcnemar_one_sided(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0)
    return 1.0;
  double p = 0.0;
  for (int x = wins; x <= n; ++x) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) -
                            std::lgamma(n - x + 1.0) - n * std::log(2.0);
    p += std::exp(log_term);
  }
  return std::min(1.0, p);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]])
      ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t)
      ranks[idx[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("spearman needs equally long samples");
  if (x.size() < 2)
    return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

InstanceRecord run_instance(const SweepSpec& spec, Algorithm alg, double alpha, int index,
                            int t_used, bool training) {
  InstanceRecord rec;
  rec.alg = alg;
  rec.alpha = alpha;
  rec.index = index;
  rec.t_used = alg == Algorithm::sis ? t_used : 0;
  rec.instance_seed = instance_seed(spec.base_seed, alpha, index, training);
  rec.solver_seed = solver_seed(spec.base_seed, alpha, index, training);

  const Formula f = make_instance(spec, alpha, rec.instance_seed);
  SolverConfig cfg = spec.solver;
  cfg.seed = rec.solver_seed;
  cfg.iteration_threshold = rec.t_used;
  if (spec.budget_seconds > 0.0)
    cfg.time_budget = std::chrono::duration<double>(spec.budget_seconds);
  const SolveOutcome out = alg == Algorithm::sid ? solve_sid(f, cfg) : solve_sis(f, cfg);
  rec.status = out.status;
  rec.failure = out.failure;
  rec.wall_seconds = out.stats.wall_seconds;
  return rec;
}

std::map<double, int> tune_T(const SweepSpec& spec) {
  spec.validate();
  std::map<double, int> best;
  if (spec.t_grid.size() == 1) {
    for (double a : spec.alphas)
      best[a] = spec.t_grid.front();
    return best;
  }
  struct Job {
    double alpha;
    int t;
    int index;
  };
  std::vector<Job> jobs;
  for (double a : spec.alphas)
    for (int t : spec.t_grid)
      for (int i = 0; i < spec.train_instances; ++i)
        jobs.push_back({a, t, i});
  std::vector<std::uint8_t> solved(jobs.size(), 0);
  parallel_for(jobs.size(), spec.parallelism, [&](std::size_t j) {
    const Job& job = jobs[j];
    solved[j] = run_instance(spec, Algorithm::sis, job.alpha, job.index, job.t, true).status ==
                SolveStatus::sat;
  });

  std::map<std::pair<double, int>, int> wins;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    wins[{jobs[j].alpha, jobs[j].t}] += solved[j];
  for (double a : spec.alphas) {
    int best_t = 0, best_wins = -1;
    std::vector<int> grid = spec.t_grid;
    std::sort(grid.begin(), grid.end());
    for (int t : grid) {
      const int w = wins[{a, t}];
      if (w > best_wins) {
        best_wins = w;
        best_t = t;
      }
    }
    best[a] = best_t;
  }
  return best;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  const bool has_sis = std::find(spec.algs.begin(), spec.algs.end(), Algorithm::sis) != spec.algs.end();
  if (has_sis)
    result.tuned_t = tune_T(spec);

  struct Job {
    Algorithm alg;
    double alpha;
    int index;
  };
  std::vector<Job> jobs;
  for (Algorithm alg : spec.algs)
    for (double a : spec.alphas)
      for (int i = 0; i < spec.instances_per_alpha; ++i)
        jobs.push_back({alg, a, i});
  result.instances.resize(jobs.size());
  parallel_for(jobs.size(), spec.parallelism, [&](std::size_t j) {
    const Job& job = jobs[j];
    const int t = job.alg == Algorithm::sis ? result.tuned_t.at(job.alpha) : 0;
    result.instances[j] = run_instance(spec, job.alg, job.alpha, job.index, t, false);
  });

  for (Algorithm alg : spec.algs) {
    for (double a : spec.alphas) {
      SweepRow row;
      row.alg = alg;
      row.k = spec.k;
      row.n = spec.n;
      row.alpha = a;
      row.t_used = alg == Algorithm::sis ? result.tuned_t.at(a) : 0;
      double wall = 0.0;
      for (const InstanceRecord& rec : result.instances) {
        if (rec.alg != alg || rec.alpha != a)
          continue;
        ++row.trials;
        wall += rec.wall_seconds;
        if (rec.status == SolveStatus::sat)
          ++row.successes;
        else if (rec.status == SolveStatus::unsat_claim)
          ++row.unsat_claim;
        else if (rec.failure == FailureKind::non_convergence)
          ++row.non_convergence;
        else if (rec.failure == FailureKind::local_search_timeout)
          ++row.local_search_timeout;
        else
          ++row.contradiction;
      }
      row.rate = row.trials ? static_cast<double>(row.successes) / row.trials : 0.0;
      const Interval ci = wilson_interval(row.successes, row.trials);
      row.ci_low = std::min(ci.low, row.rate);
      row.ci_high = std::max(ci.high, row.rate);
      row.mean_wall_seconds = row.trials ? wall / row.trials : 0.0;
      result.rows.push_back(row);
    }
  }
  return result;
}

std::map<Algorithm, std::optional<double>> algorithmic_threshold(const std::vector<SweepRow>& rows,
                                                                 double bar) {
  std::map<Algorithm, std::optional<double>> out;
  for (const SweepRow& row : rows) {
    auto& best = out[row.alg];
    if (row.rate > bar && (!best || row.alpha > *best))
      best = row.alpha;
  }
  return out;
}

std::array<double, kHistogramBins> magnetization_histogram(const MarginalTable& m) {
  std::array<double, kHistogramBins> hist{};
  if (m.rows.empty())
    return hist;
  for (const VariableMarginal& row : m.rows) {
    auto bin = static_cast<std::size_t>(row.magnetization() * kHistogramBins);
    hist[std::min(bin, kHistogramBins - 1)] += 1.0;
  }
  for (double& h : hist)
    h /= static_cast<double>(m.rows.size());
  return hist;
}

CalibrationTrace calibration_trace(const Formula& f, const SolverConfig& cfg, double bar,
                                   Var cap_n) {
  if (f.n_vars() > cap_n)
    throw OracleRefused("calibration trace needs n_vars <= " + std::to_string(cap_n));
  CalibrationTrace trace;
  const EnumerateOptions opts{cap_n, 0};
  const RoundObserver observer = [&](const RoundView& view) {
    if (trace.truncated)
      return;
    CalibrationRow row;
    row.round = view.round;
    row.live_vars = view.graph.live_var_count();
    row.mean_magnetization = view.marginals.mean_magnetization();
    row.histogram = magnetization_histogram(view.marginals);
    const EnumerationResult e = enumerate(view.graph.current_formula(f), opts);
    row.solution_count = e.count;
    if (e.count == 0) {
      row.truncated = true;
      trace.truncated = true;
    } else {
      row.calibration = calibration(view.marginals, e, bar);
      row.mean_hamming = e.count >= 2 ? e.mean_pairwise_hamming() : 0.0;
    }
    trace.rows.push_back(row);
  };
  trace.outcome = solve_sis(f, cfg, observer);
  // Round actions are only known once the solver has branched.
  for (CalibrationRow& row : trace.rows) {
    for (const RoundRecord& rec : trace.outcome.stats.trace) {
      if (rec.round == row.round)
        row.action = rec.action;
    }
  }
  return trace;
}

namespace {

std::string_view action_name(RoundAction a) {
  switch (a) {
  case RoundAction::streamline:
    return "streamline";
  case RoundAction::decimate:
    return "decimate";
  case RoundAction::local_search:
    return "local_search";
  }
  return "?";
}

} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "alg,k,n,alpha,T_used,successes,trials,rate,ci_low,ci_high,"
         "fail_nonconvergence,fail_localsearch_timeout,fail_contradiction,unsat_claim,"
         "mean_wall_s\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.alg) << ',' << r.k << ',' << r.n << ',' << r.alpha << ',' << r.t_used
        << ',' << r.successes << ',' << r.trials << ',' << r.rate << ',' << r.ci_low << ','
        << r.ci_high << ',' << r.non_convergence << ',' << r.local_search_timeout << ','
        << r.contradiction << ',' << r.unsat_claim << ',' << r.mean_wall_seconds << '\n';
  }
}

void write_instance_csv(std::ostream& out, const std::vector<InstanceRecord>& records) {
  out << "alg,alpha,index,T_used,instance_seed,solver_seed,status,failure,wall_s\n";
  for (const InstanceRecord& r : records) {
    out << to_string(r.alg) << ',' << r.alpha << ',' << r.index << ',' << r.t_used << ','
        << r.instance_seed << ',' << r.solver_seed << ',' << to_string(r.status) << ','
        << to_string(r.failure) << ',' << r.wall_seconds << '\n';
  }
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows,
                           int instance, bool header) {
  if (header) {
    out << "instance,round,action,live_vars,solutions,calibration,mean_hamming,"
           "mean_magnetization,truncated";
    for (std::size_t b = 0; b < kHistogramBins; ++b)
      out << ",hist_" << b;
    out << '\n';
  }
  for (const CalibrationRow& r : rows) {
    out << instance << ',' << r.round << ',' << action_name(r.action) << ',' << r.live_vars
        << ',' << r.solution_count << ',' << r.calibration << ',' << r.mean_hamming << ','
        << r.mean_magnetization << ',' << (r.truncated ? 1 : 0);
    for (double h : r.histogram)
      out << ',' << h;
    out << '\n';
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos)
      end = s.size();
    const auto item = trim(s.substr(pos, end - pos));
    if (!item.empty())
      out.push_back(item);
    pos = end + 1;
  }
  return out;
}

template <typename T> T parse_number(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("bad value for '" + key + "': '" + std::string(text) + "'");
  return value;
}

template <typename T> std::vector<T> parse_list(const std::string& key, std::string_view text) {
  std::vector<T> out;
  for (auto item : split_list(text))
    out.push_back(parse_number<T>(key, item));
  return out;
}

} // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

std::vector<std::string> apply_solver_keys(const KeyValues& kv, SolverConfig& cfg) {
  std::vector<std::string> used;
  for (const auto& [key, value] : kv) {
    bool hit = true;
    if (key == "r_frac")
      cfg.r_frac = parse_number<double>(key, value);
    else if (key == "r_basis") {
      if (value == "original")
        cfg.r_basis = RBasis::original_n;
      else if (value == "live")
        cfg.r_basis = RBasis::live_n;
      else
        throw std::invalid_argument("r_basis must be 'original' or 'live'");
    } else if (key == "T")
      cfg.iteration_threshold = parse_number<int>(key, value);
    else if (key == "counter_threshold")
      cfg.counter_threshold = parse_number<std::uint32_t>(key, value);
    else if (key == "epsilon_frac")
      cfg.epsilon_frac = parse_number<double>(key, value);
    else if (key == "pairing") {
      if (value == "highest_lowest")
        cfg.pairing = Pairing::highest_with_lowest;
      else if (value == "blocks")
        cfg.pairing = Pairing::blocks;
      else
        throw std::invalid_argument("pairing must be 'highest_lowest' or 'blocks'");
    } else if (key == "msg_tol")
      cfg.sp.msg_tol = parse_number<double>(key, value);
    else if (key == "max_sweeps")
      cfg.sp.max_sweeps = parse_number<int>(key, value);
    else if (key == "restarts")
      cfg.sp.restarts = parse_number<int>(key, value);
    else if (key == "damping")
      cfg.sp.damping = parse_number<double>(key, value);
    else if (key == "polarity") {
      if (value == "toward_literal")
        cfg.sp.polarity = WarningPolarity::toward_literal;
      else if (value == "away_from_literal")
        cfg.sp.polarity = WarningPolarity::away_from_literal;
      else
        throw std::invalid_argument("polarity must be 'toward_literal' or 'away_from_literal'");
    } else if (key == "noise")
      cfg.ws.noise = parse_number<double>(key, value);
    else if (key == "max_flips")
      cfg.ws.max_flips = parse_number<std::uint64_t>(key, value);
    else if (key == "tries")
      cfg.ws.tries = parse_number<int>(key, value);
    else
      hit = false;
    if (hit)
      used.push_back(key);
  }
  return used;
}

namespace {

void reject_unknown(const KeyValues& kv, const std::set<std::string>& known) {
  for (const auto& [key, value] : kv) {
    if (!known.contains(key))
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

} // namespace

SweepSpec sweep_spec_from_config(const KeyValues& kv) {
  SweepSpec spec;
  const auto solver_keys = apply_solver_keys(kv, spec.solver);
  std::set<std::string> known(solver_keys.begin(), solver_keys.end());
  for (const auto& [key, value] : kv) {
    bool hit = true;
    if (key == "kind") {
      if (value == "ksat")
        spec.kind = InstanceKind::ksat;
      else if (value == "xor2")
        spec.kind = InstanceKind::xor2sat;
      else
        throw std::invalid_argument("kind must be 'ksat' or 'xor2'");
    } else if (key == "k")
      spec.k = parse_number<std::uint32_t>(key, value);
    else if (key == "n")
      spec.n = parse_number<Var>(key, value);
    else if (key == "alphas")
      spec.alphas = parse_list<double>(key, value);
    else if (key == "instances")
      spec.instances_per_alpha = parse_number<int>(key, value);
    else if (key == "algs") {
      spec.algs.clear();
      for (auto name : split_list(value))
        spec.algs.push_back(parse_algorithm(name));
    } else if (key == "t_grid")
      spec.t_grid = parse_list<int>(key, value);
    else if (key == "train_instances")
      spec.train_instances = parse_number<int>(key, value);
    else if (key == "seed")
      spec.base_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "parallelism")
      spec.parallelism = parse_number<unsigned>(key, value);
    else if (key == "budget_seconds")
      spec.budget_seconds = parse_number<double>(key, value);
    else
      hit = false;
    if (hit)
      known.insert(key);
  }
  reject_unknown(kv, known);
  spec.validate();
  return spec;
}

CalibrationSpec calibration_spec_from_config(const KeyValues& kv) {
  CalibrationSpec spec;
  spec.solver.iteration_threshold = 10;
  const auto solver_keys = apply_solver_keys(kv, spec.solver);
  std::set<std::string> known(solver_keys.begin(), solver_keys.end());
  for (const auto& [key, value] : kv) {
    bool hit = true;
    if (key == "k")
      spec.k = parse_number<std::uint32_t>(key, value);
    else if (key == "n")
      spec.n = parse_number<Var>(key, value);
    else if (key == "alpha")
      spec.alpha = parse_number<double>(key, value);
    else if (key == "instances")
      spec.instances = parse_number<int>(key, value);
    else if (key == "seed")
      spec.base_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "bar")
      spec.bar = parse_number<double>(key, value);
    else if (key == "cap_n")
      spec.cap_n = parse_number<Var>(key, value);
    else
      hit = false;
    if (hit)
      known.insert(key);
  }
  reject_unknown(kv, known);
  if (spec.instances < 1)
    throw std::invalid_argument("instances must be >= 1");
  GenSpec{spec.n, spec.alpha, spec.k, 0, InstanceKind::ksat}.validate();
  spec.solver.validate();
  return spec;
}

std::vector<SeededFormula> satisfiable_instances(const CalibrationSpec& spec) {
  std::vector<SeededFormula> out;
  const EnumerateOptions opts{spec.cap_n, 0};
  for (int index = 0; static_cast<int>(out.size()) < spec.instances; ++index) {
    if (index > 1000 * spec.instances)
      throw std::runtime_error("too few satisfiable instances at this density");
    const std::uint64_t seed = instance_seed(spec.base_seed, spec.alpha, index, false);
    Formula f = gen_ksat(GenSpec{spec.n, spec.alpha, spec.k, seed, InstanceKind::ksat});
    if (enumerate(f, opts).satisfiable())
      out.push_back({seed, std::move(f)});
  }
  return out;
}

} // namespace streamsp
