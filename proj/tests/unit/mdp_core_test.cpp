#include <gtest/gtest.h>

#include <cmath>

#include "softq/mdp.hpp"
#include "softq/tables.hpp"
#include "test_util.hpp"

using namespace softq;

TEST(ValidateMdp, SingleSelfLoopIsValid) {
  const FiniteMdp mdp(1, 1, {1.0}, 0.9);
  EXPECT_TRUE(validate_mdp(mdp).ok());
}

TEST(ValidateMdp, ReportsRowSumWithIndices) {
  const FiniteMdp mdp(1, 1, {0.5}, 0.9);
  const auto result = validate_mdp(mdp);
  ASSERT_EQ(result.violations.size(), 1u);
  EXPECT_EQ(result.violations[0], "row sum 0.5 at (s=0,a=0)");
}

TEST(ValidateMdp, DiscountOfOneRejected) {
  const FiniteMdp mdp(1, 1, {1.0}, 1.0);
  const auto result = validate_mdp(mdp);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.violations[0], "discount must be < 1");
}

TEST(ValidateMdp, NegativeProbabilityAndNegativeDiscount) {
  const FiniteMdp mdp(2, 1, {1.5, -0.5, 0.0, 1.0}, -0.1);
  const auto result = validate_mdp(mdp);
  ASSERT_EQ(result.violations.size(), 2u);
  EXPECT_EQ(result.violations[0], "discount must be >= 0");
  EXPECT_EQ(result.violations[1], "negative probability -0.5 at (s=0,a=0,s'=1)");
}

TEST(ValidateMdp, TerminalStateMustSelfLoop) {
  const FiniteMdp bad(2, 1, {0.0, 1.0, 1.0, 0.0}, 0.5, {false, true});
  EXPECT_FALSE(validate_mdp(bad).ok());
  const FiniteMdp good(2, 1, {0.0, 1.0, 0.0, 1.0}, 0.5, {false, true});
  EXPECT_TRUE(validate_mdp(good).ok());
  EXPECT_THROW(make_checked_mdp(bad), InvalidModel);
}

TEST(FiniteMdp, ShapeMismatchThrows) {
  EXPECT_THROW(FiniteMdp(2, 2, {1.0, 0.0}, 0.5), InvalidModel);
  EXPECT_THROW(FiniteMdp(0, 1, {}, 0.5), InvalidModel);
}

TEST(RandomMdp, DeterministicPerSeed) {
  const FiniteMdp a = random_mdp(7, 5, 3, 0.95, 1.0);
  const FiniteMdp b = random_mdp(7, 5, 3, 0.95, 1.0);
  EXPECT_EQ(a, b);
  const FiniteMdp c = random_mdp(8, 5, 3, 0.95, 1.0);
  EXPECT_NE(a.transition(), c.transition());
}

TEST(RandomMdp, ThousandSeedsAllValid) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t s = 1 + seed % 8;
    const std::size_t a = 1 + seed % 4;
    const double sparsity = 0.05 + 0.95 * static_cast<double>(seed % 7) / 6.0;
    const FiniteMdp mdp = random_mdp(seed, s, a, 0.9, sparsity);
    const auto result = validate_mdp(mdp);
    ASSERT_TRUE(result.ok()) << "seed " << seed << ": " << result.violations.front();
  }
}

TEST(RandomMdp, LowSparsityKeepsOneSuccessor) {
  const FiniteMdp mdp = random_mdp(3, 6, 2, 0.9, 1e-9);
  for (StateIndex s = 0; s < 6; ++s) {
    for (ActionIndex a = 0; a < 2; ++a) {
      int nonzero = 0;
      for (double p : mdp.successors(s, a)) nonzero += p > 0.0;
      EXPECT_EQ(nonzero, 1);
    }
  }
}

TEST(RandomMdp, SparsityControlsSupportFraction) {
  const FiniteMdp mdp = random_mdp(11, 40, 5, 0.9, 0.3);
  int nonzero = 0;
  for (double p : mdp.transition()) nonzero += p > 0.0;
  const double fraction = static_cast<double>(nonzero) / static_cast<double>(mdp.transition().size());
  EXPECT_NEAR(fraction, 0.3, 0.05);
}

TEST(RandomReward, BoundedAndDeterministic) {
  const FiniteMdp mdp = random_mdp(1, 6, 3, 0.9);
  const RewardTable r1 = random_reward(1, mdp, 1.0);
  const RewardTable r1_again = random_reward(1, mdp, 1.0);
  const RewardTable r2 = random_reward(2, mdp, 1.0);
  EXPECT_LE(max_abs(r1.values()), 1.0);
  EXPECT_EQ(r1.values(), r1_again.values());
  EXPECT_NE(r1.values(), r2.values());
  EXPECT_DOUBLE_EQ(r1.bound(), 1.0);
}

TEST(RewardTable, DeclaredBoundAsserted) {
  const Matrix m = Matrix::from_rows({{0.5, -2.0}});
  EXPECT_THROW(RewardTable(m, 1.0), InvalidModel);
  EXPECT_DOUBLE_EQ(RewardTable(m).bound(), 2.0);
  EXPECT_THROW(RewardTable(Matrix::from_rows({{NAN}})), InvalidModel);
}

TEST(TaskSet, ShapeAndLabelsChecked) {
  const FiniteMdp mdp = testutil::single_state_mdp(2, 0.5);
  const RewardTable ok = testutil::reward_rows({{1.0, 0.0}});
  const RewardTable wrong = testutil::reward_rows({{1.0, 0.0, 2.0}});
  EXPECT_NO_THROW(TaskSet(mdp, {ok}, {"a"}));
  EXPECT_THROW(TaskSet(mdp, {wrong}, {"a"}), InvalidModel);
  EXPECT_THROW(TaskSet(mdp, {ok, ok}, {"a", "a"}), InvalidModel);
  const TaskSet set(mdp, {ok, ok}, {"a", "b"});
  EXPECT_EQ(set.index_of("b"), 1u);
  EXPECT_THROW(set.index_of("c"), std::out_of_range);
}

TEST(StochasticPolicy, RowsAndEntropy) {
  const auto uniform = StochasticPolicy::uniform(3, 4);
  EXPECT_NEAR(uniform.entropy(0), std::log(4.0), 1e-15);
  EXPECT_TRUE(uniform.strictly_positive());
  const std::vector<ActionIndex> actions{1, 0};
  const auto one_hot = StochasticPolicy::one_hot(actions, 2);
  EXPECT_EQ(one_hot.entropy(0), 0.0);
  EXPECT_FALSE(one_hot.strictly_positive());
  EXPECT_THROW(StochasticPolicy::from_probs(Matrix::from_rows({{0.5, 0.4}})), InvalidModel);
}

TEST(QTable, RejectsBadTemperatureAndEntries) {
  EXPECT_THROW(QTable(Matrix(1, 1), 0.0), InvalidModel);
  EXPECT_THROW(QTable(Matrix(1, 1, INFINITY), 1.0), InvalidModel);
}
