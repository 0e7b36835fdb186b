#pragma once

#include "streamsp/factor_graph.hpp"
#include "streamsp/rng.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace streamsp {

// Survey messages eta(a -> i), stored densely by edge id. Only entries of
// live edges are meaningful; dead-edge slots keep whatever value they had.
struct MessageState {
  std::vector<double> eta;

  double operator[](EdgeId e) const { return eta[e]; }
  double& operator[](EdgeId e) { return eta[e]; }
  std::size_t size() const { return eta.size(); }
};

// Which way a clause's warning pushes the variable it is sent to.
//
// toward_literal: a warning from a clause containing literal l asks the
//   variable to make l true (a positive occurrence pushes toward 1). This is
//   the cavity-method reading and the default.
// away_from_literal: the mirror image, obtained by exchanging the roles of
//   positive and negative occurrences in the marginal products.
enum class WarningPolarity { toward_literal, away_from_literal };

struct SpConfig {
  double msg_tol = 1e-3;
  int max_sweeps = 1000;
  int restarts = 3; // total random (re)initializations tried before giving up
  double damping = 0.0;
  WarningPolarity polarity = WarningPolarity::toward_literal;

  void validate() const; // throws std::invalid_argument
};

// Uniform [0,1) message on every edge slot (dead slots included so the
// state can be indexed by any edge id).
MessageState init_messages(const FactorGraph& g, std::uint64_t seed);
void init_messages(const FactorGraph& g, Rng& rng, MessageState& msgs);

// Gives fresh uniform messages to edge slots created since `msgs` was sized
// (after streamlining clauses were inserted).
void extend_messages(const FactorGraph& g, Rng& rng, MessageState& msgs);

struct SpSweepResult {
  double max_delta = 0.0;
  bool contradiction = false;
  // Variable whose cavity normalizer vanished, when contradiction is set.
  Var contradiction_var = 0;
};

// One asynchronous pass over all live edges in a fresh random order. For
// edge (a, i):
//
//   eta'(a->i) = prod over j in V(a)\i of factor_j
//
// where for each other variable j of clause a, with S = product of
// (1 - eta(b->j)) over the other clauses b where j has the same sign as in a,
// and U = the same product over clauses where j has the opposite sign:
//
//   pi_u = (1 - U) * S,  pi_s = (1 - S) * U,  pi_0 = S * U
//   factor_j = pi_u / (pi_u + pi_s + pi_0)
//
// A zero normalizer (S = U = 0) sets the message to 0 and flags a contradiction.
SpSweepResult sp_update_sweep(const FactorGraph& g, MessageState& msgs, Rng& rng,
                            const SpConfig& cfg);

enum class SpStatus { converged, unconverged, contradiction };

struct SpResult {
  SpStatus status = SpStatus::unconverged;
  int sweeps = 0;   // total over all attempts
  int attempts = 0; // initializations used, the first being the given state
  Var contradiction_var = 0;
};

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

// Sweeps until max_delta < msg_tol. The first attempt starts from `msgs`
// (warm start); each later attempt re-draws all messages from `rng`. Stops
// early with `unconverged` once `deadline` has passed.
SpResult run_sp(const FactorGraph& g, const SpConfig& cfg, Rng& rng, MessageState& msgs,
                Deadline deadline = std::nullopt);

// Cold start: messages drawn from `seed`. The converged state is written to `out`.
SpResult run_sp(const FactorGraph& g, const SpConfig& cfg, std::uint64_t seed,
                MessageState& out);

struct VariableMarginal {
  Var var = 0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu_star = 1.0;

  double magnetization() const { return mu0 > mu1 ? mu0 - mu1 : mu1 - mu0; }
  // argmax over {0,1}; ties prefer 0.
  bool preferred_value() const { return mu1 > mu0; }
  double preferred_mass() const { return mu1 > mu0 ? mu1 : mu0; }
};

struct MarginalTable {
  std::vector<VariableMarginal> rows; // one per live variable, ascending var
  bool contradiction = false;
  Var contradiction_var = 0;

  double total_bias() const;
  double mean_magnetization() const;
};

// Per live variable, with P = positive and N = negative occurrences and
// prod_X = product of (1 - eta) over live clauses in X:
//
//   toward_literal:     mu1 ~ (1 - prod_P) prod_N,  mu0 ~ (1 - prod_N) prod_P
//   away_from_literal:  mu1 ~ (1 - prod_N) prod_P,  mu0 ~ (1 - prod_P) prod_N
//   mu* ~ prod_P * prod_N
//
// then normalized. All three zero marks a contradiction for that variable.
MarginalTable marginalize(const FactorGraph& g, const MessageState& msgs,
                          WarningPolarity polarity = WarningPolarity::toward_literal);

} // namespace streamsp
