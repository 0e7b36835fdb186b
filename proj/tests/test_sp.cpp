#include "streamsp/gen.hpp"
#include "streamsp/rng.hpp"
#include "streamsp/sp.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace streamsp;

namespace {

// Survey update for one edge evaluated from scratch with the three-term
// normalizer written out, independent of the cached cavity products.
double naive_update(const FactorGraph& g, const MessageState& msgs, EdgeId target) {
  const Edge& t = g.edge(target);
  double out = 1.0;
  for (EdgeId e : g.clause_edges(t.clause)) {
    if (e == target || !g.edge_live(e))
      continue;
    const Edge& ej = g.edge(e);
    double same = 1.0, opposite = 1.0;
    for (EdgeId b : g.var_edges(ej.var)) {
      if (b == e || !g.edge_live(b))
        continue;
      (g.edge(b).negated == ej.negated ? same : opposite) *= 1.0 - msgs[b];
    }
    const double pi_u = (1.0 - opposite) * same;
    const double pi_s = (1.0 - same) * opposite;
    const double pi_0 = same * opposite;
    out *= pi_u / (pi_u + pi_s + pi_0);
  }
  return out;
}

} // namespace

TEST(InitMessages, CountsRangeAndDeterminism) {
  const Formula f(5, {Clause{-1, 3, -4}, Clause{1, 2, -3}, Clause{3, 4, -5}});
  const FactorGraph g(f);
  const MessageState a = init_messages(g, 17);
  ASSERT_EQ(a.size(), 9u);
  for (double x : a.eta) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_EQ(a.eta, init_messages(g, 17).eta);
  EXPECT_NE(a.eta, init_messages(g, 18).eta);
  EXPECT_EQ(init_messages(FactorGraph(Formula(3, {})), 1).size(), 0u);
}

TEST(SpConfig, Validation) {
  SpConfig c;
  EXPECT_NO_THROW(c.validate());
  c.msg_tol = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.max_sweeps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.restarts = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.damping = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SpUpdate, UnitClauseSendsCertainWarning) {
  const FactorGraph g(Formula(2, {Clause{1}, Clause{1, 2}}));
  MessageState msgs = init_messages(g, 3);
  Rng rng(1);
  sp_update_sweep(g, msgs, rng, {});
  EXPECT_EQ(msgs[0], 1.0);
}

TEST(SpUpdate, SingleBinaryClauseGoesToZero) {
  const FactorGraph g(Formula(2, {Clause{1, 2}}));
  MessageState msgs;
  msgs.eta = {0.7, 0.3};
  Rng rng(1);
  const SpSweepResult r = sp_update_sweep(g, msgs, rng, {});
  EXPECT_EQ(msgs[0], 0.0);
  EXPECT_EQ(msgs[1], 0.0);
  EXPECT_DOUBLE_EQ(r.max_delta, 0.7);
}

TEST(SpUpdate, IsolatedVariableUntouched) {
  const FactorGraph g(Formula(3, {Clause{1, 2}}));
  EXPECT_TRUE(g.var_edges(3).empty());
  MessageState msgs = init_messages(g, 4);
  Rng rng(2);
  sp_update_sweep(g, msgs, rng, {});
  EXPECT_EQ(msgs.size(), 2u);
}

// a = (x1 v x2), b = (-x2 v x3): with eta(b->2) = 0.4 and x2 in no other
// clause, factor_2 for edge (a,1) = (1 - 0.6) * 1 / (0.4 + 0 + 0.6) = 0.4,
// provided (b,2) has not been updated yet in the same sweep.
TEST(SpUpdate, HandEvaluatedEdge) {
  const FactorGraph g(Formula(3, {Clause{1, 2}, Clause{-2, 3}}));
  MessageState msgs;
  msgs.eta = {0.9, 0.9, 0.4, 0.9};
  EXPECT_NEAR(naive_update(g, msgs, 0), 0.4, 1e-15);
  // Edge (b,2) sees x3 with no other clause: factor 0.
  EXPECT_EQ(naive_update(g, msgs, 2), 0.0);
}

TEST(SpUpdate, ZeroIsAFixedPoint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FactorGraph g(gen_ksat({60, 4.2, 3, seed}));
    MessageState msgs;
    msgs.eta.assign(g.edge_slots(), 0.0);
    Rng rng(seed);
    const SpSweepResult r = sp_update_sweep(g, msgs, rng, {});
    EXPECT_EQ(r.max_delta, 0.0);
    for (double x : msgs.eta)
      ASSERT_EQ(x, 0.0);
  }
}

TEST(SpUpdate, Damping) {
  const FactorGraph g(Formula(2, {Clause{1, 2}}));
  MessageState msgs;
  msgs.eta = {0.8, 0.4};
  SpConfig cfg;
  cfg.damping = 0.25;
  Rng rng(1);
  sp_update_sweep(g, msgs, rng, cfg);
  EXPECT_DOUBLE_EQ(msgs[0], 0.2);
  EXPECT_DOUBLE_EQ(msgs[1], 0.1);
}

TEST(SpUpdate, RejectsShortMessageState) {
  const FactorGraph g(Formula(2, {Clause{1, 2}}));
  MessageState msgs;
  Rng rng(1);
  EXPECT_THROW(sp_update_sweep(g, msgs, rng, {}), std::invalid_argument);
}

TEST(RunSp, ConvergedStateSatisfiesTheUpdateEquations) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FactorGraph g(gen_ksat({80, 3.8, 3, seed}));
    SpConfig cfg;
    cfg.msg_tol = 1e-12;
    cfg.max_sweeps = 5000;
    MessageState msgs;
    const SpResult r = run_sp(g, cfg, seed, msgs);
    ASSERT_EQ(r.status, SpStatus::converged) << seed;
    for (EdgeId e = 0; e < g.edge_slots(); ++e)
      ASSERT_NEAR(msgs[e], naive_update(g, msgs, e), 1e-9) << "seed " << seed << " edge " << e;
  }
}

TEST(RunSp, ZeroEdges) {
  const FactorGraph g(Formula(3, {}));
  MessageState msgs;
  const SpResult r = run_sp(g, {}, 1, msgs);
  EXPECT_EQ(r.status, SpStatus::converged);
  EXPECT_EQ(r.sweeps, 0);
  EXPECT_EQ(msgs.size(), 0u);
}

TEST(RunSp, DirectContradiction) {
  const FactorGraph g(Formula(1, {Clause{1}, Clause{-1}}));
  MessageState msgs;
  const SpResult r = run_sp(g, {}, 1, msgs);
  if (r.status != SpStatus::contradiction) {
    ASSERT_EQ(r.status, SpStatus::converged);
    EXPECT_TRUE(marginalize(g, msgs).contradiction);
  }
}

TEST(RunSp, Deterministic) {
  const FactorGraph g(gen_ksat({200, 4.1, 3, 8}));
  MessageState a, b;
  const SpResult ra = run_sp(g, {}, 99, a);
  const SpResult rb = run_sp(g, {}, 99, b);
  EXPECT_EQ(ra.sweeps, rb.sweeps);
  EXPECT_EQ(a.eta, b.eta);
}

TEST(RunSp, UnconvergedAfterAllRestarts) {
  const FactorGraph g(gen_ksat({300, 4.2, 3, 1}));
  SpConfig cfg;
  cfg.max_sweeps = 1;
  cfg.restarts = 2;
  cfg.msg_tol = 1e-300;
  MessageState msgs;
  const SpResult r = run_sp(g, cfg, 5, msgs);
  EXPECT_EQ(r.status, SpStatus::unconverged);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(r.sweeps, 2);
}

TEST(RunSp, ExpiredDeadline) {
  const FactorGraph g(gen_ksat({100, 4.0, 3, 1}));
  MessageState msgs = init_messages(g, 1);
  Rng rng(1);
  const SpResult r = run_sp(g, {}, rng, msgs, std::chrono::steady_clock::now());
  EXPECT_EQ(r.status, SpStatus::unconverged);
  EXPECT_EQ(r.sweeps, 0);
}

TEST(Marginalize, EqualWarningsGiveThirds) {
  // x1 positive in a, negative in b.
  const FactorGraph g(Formula(3, {Clause{1, 2}, Clause{-1, 3}}));
  MessageState msgs;
  msgs.eta.assign(g.edge_slots(), 0.5);
  const MarginalTable t = marginalize(g, msgs);
  const VariableMarginal& v1 = t.rows[0];
  EXPECT_EQ(v1.var, 1u);
  EXPECT_NEAR(v1.mu0, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(v1.mu1, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(v1.mu_star, 1.0 / 3.0, 1e-15);
}

TEST(Marginalize, VariableWithoutClauses) {
  const FactorGraph g(Formula(2, {Clause{1}}));
  MessageState msgs;
  msgs.eta = {1.0};
  const MarginalTable t = marginalize(g, msgs);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1].mu0, 0.0);
  EXPECT_EQ(t.rows[1].mu1, 0.0);
  EXPECT_EQ(t.rows[1].mu_star, 1.0);
}

TEST(Marginalize, AllZeroMessagesAreParamagnetic) {
  const FactorGraph g(gen_ksat({50, 4.0, 3, 2}));
  MessageState msgs;
  msgs.eta.assign(g.edge_slots(), 0.0);
  const MarginalTable t = marginalize(g, msgs);
  for (const VariableMarginal& r : t.rows) {
    EXPECT_EQ(r.mu_star, 1.0);
    EXPECT_EQ(r.magnetization(), 0.0);
  }
  EXPECT_EQ(t.total_bias(), 0.0);
}

TEST(Marginalize, PolarityDirection) {
  // A certain warning from the unit clause (x1) pushes x1 to 1 under the
  // default convention and to 0 under the mirrored one.
  const FactorGraph g(Formula(1, {Clause{1}}));
  MessageState msgs;
  msgs.eta = {1.0};
  const MarginalTable toward = marginalize(g, msgs, WarningPolarity::toward_literal);
  EXPECT_EQ(toward.rows[0].mu1, 1.0);
  EXPECT_TRUE(toward.rows[0].preferred_value());
  const MarginalTable away = marginalize(g, msgs, WarningPolarity::away_from_literal);
  EXPECT_EQ(away.rows[0].mu0, 1.0);
  EXPECT_FALSE(away.rows[0].preferred_value());
}

TEST(Marginalize, ZeroNormalizerFlagsContradiction) {
  const FactorGraph g(Formula(1, {Clause{1}, Clause{-1}}));
  MessageState msgs;
  msgs.eta = {1.0, 1.0};
  const MarginalTable t = marginalize(g, msgs);
  EXPECT_TRUE(t.contradiction);
  EXPECT_EQ(t.contradiction_var, 1u);
}

TEST(SpProperty, RangeAndNormalizationAcrossSweeps) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FactorGraph g(gen_ksat({50, 4.2, 3, seed}));
    MessageState msgs = init_messages(g, seed);
    Rng rng(seed + 1);
    for (int s = 0; s < 30; ++s) {
      sp_update_sweep(g, msgs, rng, {});
      for (double x : msgs.eta) {
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
      }
      for (const VariableMarginal& r : marginalize(g, msgs).rows) {
        ASSERT_NEAR(r.mu0 + r.mu1 + r.mu_star, 1.0, 1e-9);
        ASSERT_GE(r.mu0, 0.0);
        ASSERT_GE(r.mu1, 0.0);
        ASSERT_GE(r.mu_star, 0.0);
      }
    }
  }
}
