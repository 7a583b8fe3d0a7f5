#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "softq/mdp.hpp"
#include "softq/tables.hpp"

namespace softq {

inline constexpr double kDefaultTolerance = 1e-10;

// alpha * log sum_a exp(q_a / alpha), max-shifted.
double soft_value(std::span<const double> q_row, double temperature);
double soft_value(const QTable& q, StateIndex s);
ValueTable soft_values(const QTable& q);

// pi(a|s) = exp((Q(s,a) - V(s)) / alpha). Log-probabilities are kept exactly
// as (Q - V) / alpha even where the probability underflows to zero.
StochasticPolicy boltzmann_policy(const QTable& q);

// Q'(s,a) = r(s,a) + gamma * sum_s' P(s'|s,a) V(s').
QTable soft_backup(const FiniteMdp& mdp, const RewardTable& reward, const QTable& q);

// ceil(log(tol (1-gamma) / (2 B)) / log gamma) + 16, or 16 when gamma or B is 0.
std::size_t default_max_iterations(double discount, double bound, double tol);

// Loops stop once the sup-norm change is at most tol * min(1, (1-gamma)/gamma);
// the distance to the fixed point is then at most tol as well.
double stopping_threshold(double tol, double discount);

struct SoftSolution {
  QTable q;
  ValueTable v;
  StochasticPolicy policy;
  SolveDiagnostics diagnostics;
};

// Soft Q-iteration from Q = 0. Throws SolveFailure when max_iter backups do
// not reach the tolerance. The default iteration cap uses B + alpha ln|A| as
// the value bound.
SoftSolution solve_soft_q(const FiniteMdp& mdp, const RewardTable& reward, double temperature,
                          double tol = kDefaultTolerance,
                          std::optional<std::size_t> max_iter = std::nullopt);

// Fixed point of Q <- r + gamma E_s' E_{a'~pi}[Q(s',a') - alpha log pi(a'|s')],
// with 0 log 0 = 0.
QTable soft_policy_evaluation(const FiniteMdp& mdp, const RewardTable& reward,
                              const StochasticPolicy& policy, double temperature,
                              double tol = kDefaultTolerance,
                              std::optional<std::size_t> max_iter = std::nullopt);

struct ResidualDescentResult {
  QTable q;
  SolveDiagnostics diagnostics;  // trace holds the Bellman residual per sweep
};

// Semi-gradient descent on 1/2 sum (Q - y)^2 with y = r + gamma P V(Q) frozen
// for each sweep. Stops when |Q - y| <= tol * min(1, 1 - gamma). Throws
// SolveFailure on divergence (residual grows 50 sweeps in a row) or when
// max_iter updates are exhausted.
ResidualDescentResult residual_descent_solve(const FiniteMdp& mdp, const RewardTable& reward,
                                             double temperature, double step,
                                             double tol = kDefaultTolerance,
                                             std::optional<std::size_t> max_iter = std::nullopt);

inline constexpr std::size_t kDivergenceWindow = 50;

struct HardSolution {
  Matrix q;
  std::vector<double> v;
  StochasticPolicy policy;  // one-hot greedy, lowest index on ties
  SolveDiagnostics diagnostics;
};

// Value iteration with V(s) = max_a Q(s,a).
HardSolution hard_max_solve(const FiniteMdp& mdp, const RewardTable& reward,
                            double tol = kDefaultTolerance,
                            std::optional<std::size_t> max_iter = std::nullopt);

std::vector<ActionIndex> greedy_actions(const Matrix& q);
StochasticPolicy greedy_policy(const Matrix& q);

}  // namespace softq
