#include <gtest/gtest.h>

#include <cmath>

#include "softq/oracle.hpp"
#include "test_util.hpp"

using namespace softq;

TEST(Horizon, Formula) {
  EXPECT_EQ(oracle::HorizonConfig::for_tolerance(0.0, 1.0, 1e-10).horizon, 1u);
  EXPECT_EQ(oracle::HorizonConfig::for_tolerance(0.9, 0.0, 1e-10).horizon, 1u);
  const double expected = std::ceil(std::log(1e-10 * 0.1 / 2.0) / std::log(0.9));
  EXPECT_EQ(oracle::HorizonConfig::for_tolerance(0.9, 1.0, 1e-10).horizon,
            static_cast<std::size_t>(expected));
}

TEST(DirectSoftValue, ClosedFormAndOverflow) {
  const double row[] = {0.0, std::log(3.0)};
  EXPECT_NEAR(static_cast<double>(*oracle::direct_soft_value(row, 1.0)), std::log(4.0), 1e-15);
  const double huge[] = {1e6, 0.0};
  EXPECT_FALSE(oracle::direct_soft_value(huge, 1e-3).has_value());
}

TEST(DirectRenyi, ClosedForm) {
  const double p[] = {1.0, 0.0};
  const double q[] = {0.25, 0.75};
  EXPECT_NEAR(static_cast<double>(oracle::direct_renyi_half(p, q)), -2.0 * std::log(0.5), 1e-15);
  const double r[] = {0.0, 1.0};
  EXPECT_TRUE(std::isinf(oracle::direct_renyi_half(p, r)));
}

TEST(FiniteHorizon, SingleStateClosedForm) {
  // With equal rewards V_H = sum_{k<H+1} gamma^k (r + alpha ln A).
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto r = testutil::reward_rows({{1.0, 1.0}});
  const auto q = oracle::finite_horizon_soft_q(mdp, r, 1.0, 200);
  ASSERT_TRUE(q.has_value());
  const double v = (1.0 + std::log(2.0)) / 0.5;
  EXPECT_NEAR((*q)(0, 0), 1.0 + 0.5 * v, 1e-14);
  const auto one = oracle::finite_horizon_soft_q(mdp, r, 1.0, 1);
  EXPECT_NEAR((*one)(0, 1), 1.0 + 0.5 * std::log(2.0), 1e-15);
}

TEST(LinearSolve, SingleStateClosedForm) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.75);
  const auto r = testutil::reward_rows({{1.0, 0.0}});
  const auto pi = StochasticPolicy::from_probs(Matrix::from_rows({{0.25, 0.75}}));
  // V = (E_pi r + alpha H) / (1 - gamma).
  const double entropy = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  const double v = (0.25 + entropy) / 0.25;
  const auto q = oracle::linear_solve_policy_eval(mdp, r, pi, 1.0);
  EXPECT_NEAR(q(0, 0), 1.0 + 0.75 * v, 1e-13);
  EXPECT_NEAR(q(0, 1), 0.75 * v, 1e-13);
}

TEST(LinearSolve, DStarOnSelfLoop) {
  // D = gamma (C + D) for constant C gives D = gamma C / (1 - gamma).
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto pi = StochasticPolicy::uniform(1, 2);
  const Matrix d = oracle::linear_solve_d_star(mdp, pi, Matrix(1, 2, 3.0));
  EXPECT_NEAR(d(0, 0), 3.0, 1e-14);
  const Matrix unrolled = oracle::unrolled_d_star(mdp, pi, Matrix(1, 2, 3.0), 80);
  EXPECT_NEAR(unrolled(0, 1), 3.0, 1e-14);
}

TEST(UnrolledCStar, OneStepIsDiscountedDivergence) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const auto p1 = StochasticPolicy::from_probs(Matrix::from_rows({{0.5, 0.5}}));
  const auto p2 = StochasticPolicy::from_probs(Matrix::from_rows({{1.0, 0.0}}));
  const double d = -2.0 * std::log(std::sqrt(0.5));
  const Matrix c = oracle::unrolled_c_star(mdp, p1, p2, 1.0, 1);
  EXPECT_NEAR(c(0, 0), 0.5 * d, 1e-15);
}

TEST(MeanTable, Entrywise) {
  const Matrix tables[] = {Matrix::from_rows({{1.0, 2.0}}), Matrix::from_rows({{3.0, -2.0}})};
  EXPECT_EQ(oracle::mean_table(tables), Matrix::from_rows({{2.0, 0.0}}));
}

TEST(ChainMarginals, RowsAreDistributions) {
  const auto inst = testutil::seeded_instance(3, 6, 3, 0.9);
  const auto pi = StochasticPolicy::uniform(6, 3);
  const auto m = oracle::chain_marginals(inst.mdp, pi, 2, 5);
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m[0][2], 1.0);
  for (const auto& row : m) {
    double total = 0.0;
    for (double p : row) total += p;
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
}

TEST(VisitProbability, StartAndUnreachable) {
  // State 1 is absorbing and unreachable from state 0.
  const FiniteMdp mdp(2, 1, {1.0, 0.0, 0.0, 1.0}, 0.9);
  const auto pi = StochasticPolicy::uniform(2, 1);
  EXPECT_EQ(oracle::visit_probability(mdp, pi, 0, {0}, 3), 1.0);
  EXPECT_EQ(oracle::visit_probability(mdp, pi, 0, {1}, 3), 0.0);
}

TEST(TinyCertificate, RejectsLargeInstances) {
  const auto inst = testutil::seeded_instance(1, 4, 2, 0.9);
  EXPECT_THROW(oracle::exhaustive_tiny_certificate(inst.mdp, inst.tasks, {0, 1}, 1e-10),
               std::invalid_argument);
}

TEST(TinyCertificate, IdenticalTasksHaveZeroBounds) {
  const FiniteMdp mdp = random_mdp(2, 3, 2, 0.9);
  const RewardTable r = random_reward(3, mdp);
  const TaskSet tasks(mdp, {r, r}, {"a", "b"});
  const auto cert = oracle::exhaustive_tiny_certificate(mdp, tasks, {0, 1}, 1e-12);
  EXPECT_LE(max_abs(cert.c_star), 1e-12);
  EXPECT_LE(max_abs(cert.d_star), 1e-12);
  EXPECT_LE(max_abs(cert.lemma_upper_slack), 1e-10);
  EXPECT_LE(max_abs(cert.theorem_slack), 1e-10);
}
