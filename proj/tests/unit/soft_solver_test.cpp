#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "softq/oracle.hpp"
#include "softq/soft_solver.hpp"
#include "test_util.hpp"

using namespace softq;

TEST(SoftValue, Examples) {
  const double zeros[] = {0.0, 0.0};
  EXPECT_NEAR(soft_value(zeros, 1.0), std::log(2.0), 1e-15);
  const double row[] = {1.0, 2.0, 3.0};
  EXPECT_NEAR(soft_value(row, 1.0), 3.0 + std::log1p(std::exp(-1.0) + std::exp(-2.0)), 1e-14);
  // Large entries must not overflow.
  const double big[] = {1000.0, 1000.0};
  EXPECT_NEAR(soft_value(big, 1.0), 1000.0 + std::log(2.0), 1e-12);
  // Low temperature approaches the max.
  const double near_max[] = {1.0, 0.0};
  EXPECT_NEAR(soft_value(near_max, 1e-4), 1.0, 1e-12);
}

TEST(SoftValue, MatchesUnshiftedOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(1 + trial % 6);
    for (double& x : q) x = rng.uniform(-20.0, 20.0);
    const double alpha = rng.uniform(0.5, 2.0);
    const auto expected = oracle::direct_soft_value(q, alpha);
    ASSERT_TRUE(expected.has_value());
    EXPECT_NEAR(soft_value(q, alpha), static_cast<double>(*expected), 1e-12);
  }
}

TEST(SoftValue, BoundedByMaxPlusEntropy) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(1 + trial % 5);
    for (double& x : q) x = rng.uniform(-5.0, 5.0);
    const double alpha = rng.uniform(0.01, 3.0);
    const double hi = *std::max_element(q.begin(), q.end());
    const double v = soft_value(q, alpha);
    EXPECT_GE(v, hi - 1e-12);
    EXPECT_LE(v, hi + alpha * std::log(static_cast<double>(q.size())) + 1e-12);
  }
}

TEST(SoftBackup, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 6, 1 + seed % 3, 0.9);
    const auto& r = inst.tasks.reward(0);
    Matrix q(inst.mdp.num_states(), inst.mdp.num_actions());
    Rng rng(seed);
    for (double& x : q.data()) x = rng.uniform(-3.0, 3.0);
    const QTable backed = soft_backup(inst.mdp, r, QTable(q, 1.0));
    const auto expected = oracle::naive_soft_backup(inst.mdp, r, q, 1.0);
    ASSERT_TRUE(expected.has_value());
    EXPECT_LT(max_abs_diff(backed.values(), *expected), 1e-12) << "seed " << seed;
  }
}

TEST(SolveSoftQ, SingleStateClosedForm) {
  // Q = r + gamma V, V = alpha ln sum exp(Q/alpha); with equal rewards
  // V = (r + alpha ln A) / (1 - gamma).
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto sol = solve_soft_q(mdp, testutil::reward_rows({{1.0, 1.0}}), 1.0);
  const double v = (1.0 + std::log(2.0)) / 0.5;
  EXPECT_NEAR(sol.v[0], v, 1e-10);
  EXPECT_NEAR(sol.q(0, 0), 1.0 + 0.5 * v, 1e-10);
  EXPECT_NEAR(sol.policy.prob(0, 1), 0.5, 1e-15);
}

TEST(SolveSoftQ, ZeroDiscountIsRewardPlusNothing) {
  const FiniteMdp mdp = testutil::single_state_mdp(3, 0.0);
  const auto r = testutil::reward_rows({{0.2, -0.4, 0.9}});
  const auto sol = solve_soft_q(mdp, r, 0.7);
  EXPECT_EQ(sol.q.values(), r.values());
  EXPECT_EQ(sol.diagnostics.iterations, 2u);
}

TEST(SolveSoftQ, MatchesFiniteHorizonOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const double gamma = seed % 2 ? 0.95 : 0.5;
    const double alpha = seed % 3 == 0 ? 0.1 : 1.0;
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 7, 1 + seed % 4, gamma, 1, 0.5);
    const auto& r = inst.tasks.reward(0);
    const double tol = 1e-10;
    const auto sol = solve_soft_q(inst.mdp, r, alpha, tol);
    const double bound = r.bound() + alpha * std::log(static_cast<double>(inst.mdp.num_actions()));
    const auto horizon = oracle::HorizonConfig::for_tolerance(gamma, bound, tol * 1e-2).horizon;
    const auto expected = oracle::finite_horizon_soft_q(inst.mdp, r, alpha, horizon);
    ASSERT_TRUE(expected.has_value());
    EXPECT_LE(max_abs_diff(sol.q.values(), expected->values()), 2 * tol) << "seed " << seed;
  }
}

TEST(SolveSoftQ, TraceContractsAtDiscountRate) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 6, 3, 0.9);
    const auto sol = solve_soft_q(inst.mdp, inst.tasks.reward(0), 1.0);
    const auto& trace = sol.diagnostics.contraction_trace;
    ASSERT_GE(trace.size(), 2u);
    for (std::size_t k = 1; k < trace.size(); ++k) {
      EXPECT_LE(trace[k], 0.9 * trace[k - 1] + 1e-15) << "seed " << seed << " step " << k;
    }
    EXPECT_EQ(sol.diagnostics.final_residual, trace.back());
  }
}

TEST(SolveSoftQ, BoltzmannConsistency) {
  const auto inst = testutil::seeded_instance(3, 5, 4, 0.9);
  const auto sol = solve_soft_q(inst.mdp, inst.tasks.reward(0), 0.5);
  for (StateIndex s = 0; s < 5; ++s) {
    EXPECT_NEAR(sol.v[s], soft_value(sol.q, s), 1e-12);
    double total = 0.0;
    for (ActionIndex a = 0; a < 4; ++a) {
      total += sol.policy.prob(s, a);
      EXPECT_NEAR(sol.policy.log_prob(s, a), (sol.q(s, a) - sol.v[s]) / 0.5, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_TRUE(sol.policy.strictly_positive());
}

TEST(SolveSoftQ, ZeroRewardGivesEntropyValue) {
  const auto inst = testutil::seeded_instance(4, 5, 3, 0.8);
  const RewardTable zero(Matrix(5, 3));
  const auto sol = solve_soft_q(inst.mdp, zero, 2.0);
  const double expected = 2.0 * std::log(3.0) / (1.0 - 0.8);
  for (StateIndex s = 0; s < 5; ++s) EXPECT_NEAR(sol.v[s], expected, 1e-9);
}

TEST(SolveSoftQ, SandwichedByHardMax) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const double alpha = 0.05 + 0.1 * static_cast<double>(seed % 10);
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 6, 2 + seed % 3, 0.9);
    const auto& r = inst.tasks.reward(0);
    const auto soft = solve_soft_q(inst.mdp, r, alpha);
    const auto hard = hard_max_solve(inst.mdp, r);
    const double gap = alpha * std::log(static_cast<double>(inst.mdp.num_actions())) / (1.0 - 0.9);
    for (std::size_t i = 0; i < hard.q.data().size(); ++i) {
      EXPECT_GE(soft.q.values().data()[i], hard.q.data()[i] - 1e-9);
      EXPECT_LE(soft.q.values().data()[i], hard.q.data()[i] + 0.9 * gap + 1e-9);
    }
  }
}

TEST(SolveSoftQ, ExhaustedIterationsThrow) {
  const auto inst = testutil::seeded_instance(1, 4, 2, 0.99);
  try {
    solve_soft_q(inst.mdp, inst.tasks.reward(0), 1.0, 1e-10, 3);
    FAIL() << "expected SolveFailure";
  } catch (const SolveFailure& e) {
    EXPECT_EQ(e.diagnostics().iterations, 3u);
    EXPECT_EQ(e.diagnostics().contraction_trace.size(), 3u);
  }
}

TEST(SolveSoftQ, RejectsBadArguments) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto r = testutil::reward_rows({{1.0, 0.0}});
  EXPECT_THROW(solve_soft_q(mdp, r, 0.0), InvalidModel);
  EXPECT_THROW(solve_soft_q(mdp, testutil::reward_rows({{1.0}}), 1.0), InvalidModel);
}

TEST(DefaultMaxIterations, Formula) {
  EXPECT_EQ(default_max_iterations(0.0, 1.0, 1e-10), 16u);
  EXPECT_EQ(default_max_iterations(0.9, 0.0, 1e-10), 16u);
  const double expected = std::ceil(std::log(1e-10 * 0.1 / 2.0) / std::log(0.9)) + 16;
  EXPECT_EQ(default_max_iterations(0.9, 1.0, 1e-10), static_cast<std::size_t>(expected));
}

TEST(PolicyEvaluation, MatchesLinearSolve) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 8, 1 + seed % 4, 0.95, 1, 0.7);
    const auto& r = inst.tasks.reward(0);
    Matrix probs(inst.mdp.num_states(), inst.mdp.num_actions());
    Rng rng(seed + 100);
    for (StateIndex s = 0; s < probs.rows(); ++s) {
      double total = 0.0;
      for (double& p : probs.row(s)) total += (p = rng.uniform() + (seed % 5 == 0 ? 0.0 : 0.01));
      for (double& p : probs.row(s)) p /= total;
    }
    const auto pi = StochasticPolicy::from_probs(probs);
    const double alpha = seed % 2 ? 1.0 : 0.3;
    const auto q = soft_policy_evaluation(inst.mdp, r, pi, alpha);
    const auto expected = oracle::linear_solve_policy_eval(inst.mdp, r, pi, alpha);
    EXPECT_LE(max_abs_diff(q.values(), expected.values()), 1e-9) << "seed " << seed;
  }
}

TEST(PolicyEvaluation, OptimalPolicyReproducesSoftQ) {
  const auto inst = testutil::seeded_instance(8, 6, 3, 0.9);
  const auto& r = inst.tasks.reward(0);
  const auto sol = solve_soft_q(inst.mdp, r, 1.0);
  const auto q = soft_policy_evaluation(inst.mdp, r, sol.policy, 1.0);
  EXPECT_LE(max_abs_diff(q.values(), sol.q.values()), 1e-9);
}

TEST(PolicyEvaluation, SoftOptimumDominatesEveryPolicy) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 6, 2 + seed % 3, 0.9);
    const auto& r = inst.tasks.reward(0);
    const auto sol = solve_soft_q(inst.mdp, r, 1.0);
    Matrix probs(inst.mdp.num_states(), inst.mdp.num_actions());
    Rng rng(seed + 7);
    for (StateIndex s = 0; s < probs.rows(); ++s) {
      double total = 0.0;
      for (double& p : probs.row(s)) total += (p = rng.uniform());
      for (double& p : probs.row(s)) p /= total;
    }
    const auto q = soft_policy_evaluation(inst.mdp, r, StochasticPolicy::from_probs(probs), 1.0);
    for (std::size_t i = 0; i < q.values().data().size(); ++i) {
      EXPECT_LE(q.values().data()[i], sol.q.values().data()[i] + 1e-9) << "seed " << seed;
    }
  }
}

TEST(ResidualDescent, AgreesWithSoftQ) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 4, 2, 0.8);
    const auto& r = inst.tasks.reward(0);
    const auto sol = solve_soft_q(inst.mdp, r, 1.0, 1e-10);
    const auto rd = residual_descent_solve(inst.mdp, r, 1.0, 0.5, 1e-10);
    EXPECT_LE(max_abs_diff(rd.q.values(), sol.q.values()), 1e-8) << "seed " << seed;
    EXPECT_GT(rd.diagnostics.iterations, sol.diagnostics.iterations);
  }
}

TEST(ResidualDescent, UnitStepIsSoftIteration) {
  const auto inst = testutil::seeded_instance(2, 5, 3, 0.9);
  const auto& r = inst.tasks.reward(0);
  const auto one = residual_descent_solve(inst.mdp, r, 1.0, 1.0, 1e-8);
  const auto sol = solve_soft_q(inst.mdp, r, 1.0, 1e-10);
  EXPECT_LE(max_abs_diff(one.q.values(), sol.q.values()), 1e-7);
}

TEST(ResidualDescent, ZeroDiscountConvergesInOneUpdate) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.0);
  const auto r = testutil::reward_rows({{0.5, -0.5}});
  const auto rd = residual_descent_solve(mdp, r, 1.0, 1.0);
  EXPECT_EQ(rd.diagnostics.iterations, 1u);
  EXPECT_EQ(rd.q.values(), r.values());
}

TEST(ResidualDescent, LargeStepDiverges) {
  const auto inst = testutil::seeded_instance(5, 4, 2, 0.9);
  try {
    residual_descent_solve(inst.mdp, inst.tasks.reward(0), 1.0, 2.5);
    FAIL() << "expected SolveFailure";
  } catch (const SolveFailure& e) {
    const auto& trace = e.diagnostics().contraction_trace;
    ASSERT_GT(trace.size(), kDivergenceWindow);
    EXPECT_GT(trace.back(), trace.front());
  }
}

TEST(ResidualDescent, RejectsNonPositiveStep) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  EXPECT_THROW(residual_descent_solve(mdp, testutil::reward_rows({{0.0, 0.0}}), 1.0, 0.0),
               InvalidModel);
}

TEST(HardMax, SingleStateClosedForm) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto sol = hard_max_solve(mdp, testutil::reward_rows({{1.0, 0.0}}));
  EXPECT_NEAR(sol.v[0], 2.0, 1e-10);
  EXPECT_NEAR(sol.q(0, 1), 1.0, 1e-10);
  EXPECT_EQ(sol.policy.prob(0, 0), 1.0);
}

TEST(HardMax, TiesBreakToLowestIndex) {
  const FiniteMdp mdp = testutil::single_state_mdp(3, 0.5);
  const auto sol = hard_max_solve(mdp, testutil::reward_rows({{0.0, 1.0, 1.0}}));
  EXPECT_EQ(sol.policy.prob(0, 1), 1.0);
  const std::vector<ActionIndex> expected{1};
  EXPECT_EQ(greedy_actions(sol.q), expected);
}

TEST(HardMax, LowTemperatureSoftAgrees) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 5, 3, 0.9);
    const auto& r = inst.tasks.reward(0);
    const auto soft = solve_soft_q(inst.mdp, r, 1e-4);
    const auto hard = hard_max_solve(inst.mdp, r);
    const double gap = 1e-4 * std::log(3.0) / (1.0 - 0.9);
    EXPECT_LE(max_abs_diff(soft.q.values(), hard.q), gap + 1e-9);
    EXPECT_EQ(greedy_actions(soft.q.values()), greedy_actions(hard.q)) << "seed " << seed;
  }
}

TEST(Boltzmann, NearTiesStayNormalizedAtLowTemperature) {
  const QTable q(Matrix::from_rows({{17.3, 17.3 - 3e-15, 12.0}, {-8.1, -8.1 + 1e-14, -8.1}}), 1e-4);
  const auto pi = boltzmann_policy(q);
  for (StateIndex s = 0; s < 2; ++s) {
    double total = 0.0;
    for (double p : pi.row(s)) total += p;
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
}

TEST(Boltzmann, UnderflowKeepsExactLogProbabilities) {
  const QTable q(Matrix::from_rows({{0.0, -10.0}}), 0.01);
  const auto pi = boltzmann_policy(q);
  EXPECT_EQ(pi.prob(0, 0), 1.0);
  EXPECT_EQ(pi.prob(0, 1), 0.0);
  EXPECT_NEAR(pi.log_prob(0, 1), -1000.0, 1e-9);
}
