#include "softq/soft_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace softq {

namespace {

void check_shapes(const FiniteMdp& mdp, const RewardTable& reward) {
  if (reward.num_states() != mdp.num_states() || reward.num_actions() != mdp.num_actions()) {
    throw InvalidModel("reward table shape does not match the MDP");
  }
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidModel("temperature must be a finite positive number");
  }
}

void check_tolerance(double tol) {
  if (!(tol > 0.0)) throw InvalidModel("tolerance must be positive");
}

// out(s,a) = base(s,a) + gamma * sum_s' P(s'|s,a) w(s')
void add_discounted_expectation(const FiniteMdp& mdp, const std::vector<double>& w,
                                const Matrix* base, Matrix& out) {
  const double gamma = mdp.discount();
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      double expectation = 0.0;
      const auto next = mdp.successors(s, a);
      for (StateIndex t = 0; t < next.size(); ++t) expectation += next[t] * w[t];
      out(s, a) = (base ? (*base)(s, a) : 0.0) + gamma * expectation;
    }
  }
}

// V(q + d) - V(q) for one state. Equals alpha log sum_a pi_q(a) exp(d_a/alpha),
// evaluated without forming either value so small increments keep full
// relative precision.
double value_increment(std::span<const double> q, std::span<const double> d, double alpha) {
  double d_max = 0.0;
  for (double x : d) d_max = std::max(d_max, std::abs(x));
  if (d_max == 0.0) return 0.0;
  const double v = soft_value(q, alpha);
  if (d_max <= alpha) {
    double acc = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      acc += std::exp((q[a] - v) / alpha) * std::expm1(d[a] / alpha);
    }
    return alpha * std::log1p(acc);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q.size(); ++a) m = std::max(m, (q[a] - v + d[a]) / alpha);
  double sum = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) sum += std::exp((q[a] - v + d[a]) / alpha - m);
  return alpha * (m + std::log(sum));
}

std::size_t resolve_max_iter(std::optional<std::size_t> max_iter, double discount, double bound,
                             double tol) {
  return max_iter ? *max_iter : default_max_iterations(discount, bound, tol);
}

std::string iteration_message(const char* what, const SolveDiagnostics& d, double threshold) {
  return std::string(what) + ": no convergence after " + std::to_string(d.iterations) +
         " iterations (last change " + std::to_string(d.final_residual) + ", threshold " +
         std::to_string(threshold) + ")";
}

}  // namespace

double soft_value(std::span<const double> q_row, double temperature) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : q_row) m = std::max(m, x);
  double sum = 0.0;
  for (double x : q_row) sum += std::exp((x - m) / temperature);
  return m + temperature * std::log(sum);
}

double soft_value(const QTable& q, StateIndex s) { return soft_value(q.row(s), q.temperature()); }

ValueTable soft_values(const QTable& q) {
  std::vector<double> v(q.num_states());
  for (StateIndex s = 0; s < v.size(); ++s) v[s] = soft_value(q, s);
  return ValueTable(std::move(v));
}

StochasticPolicy boltzmann_policy(const QTable& q) {
  Matrix log_probs(q.num_states(), q.num_actions());
  // Normalized as (q - max)/alpha - log sum exp(...): forming (q - V)/alpha
  // directly amplifies the rounding in V by 1/alpha.
  for (StateIndex s = 0; s < q.num_states(); ++s) {
    const auto row = q.row(s);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (ActionIndex a = 0; a < q.num_actions(); ++a) {
      log_probs(s, a) = (row[a] - m) / q.temperature();
      sum += std::exp(log_probs(s, a));
    }
    const double shift = std::log(sum);
    for (ActionIndex a = 0; a < q.num_actions(); ++a) log_probs(s, a) -= shift;
  }
  return StochasticPolicy::from_log_probs(std::move(log_probs));
}

QTable soft_backup(const FiniteMdp& mdp, const RewardTable& reward, const QTable& q) {
  check_shapes(mdp, reward);
  const ValueTable v = soft_values(q);
  Matrix out(mdp.num_states(), mdp.num_actions());
  add_discounted_expectation(mdp, v.values(), &reward.values(), out);
  return QTable(std::move(out), q.temperature());
}

std::size_t default_max_iterations(double discount, double bound, double tol) {
  constexpr std::size_t kSlack = 16;
  if (discount <= 0.0 || bound <= 0.0) return kSlack;
  const double n = std::log(tol * (1.0 - discount) / (2.0 * bound)) / std::log(discount);
  if (!(n > 0.0)) return kSlack;
  return static_cast<std::size_t>(std::ceil(n)) + kSlack;
}

double stopping_threshold(double tol, double discount) {
  if (discount <= 0.0) return tol;
  return tol * std::min(1.0, (1.0 - discount) / discount);
}

SoftSolution solve_soft_q(const FiniteMdp& mdp, const RewardTable& reward, double temperature,
                          double tol, std::optional<std::size_t> max_iter) {
  check_shapes(mdp, reward);
  check_temperature(temperature);
  check_tolerance(tol);
  const std::size_t num_states = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  const double effective_bound =
      reward.bound() + temperature * std::log(static_cast<double>(num_actions));
  const std::size_t cap = resolve_max_iter(max_iter, mdp.discount(), effective_bound, tol);
  const double threshold = stopping_threshold(tol, mdp.discount());

  // Iterate on the increments d_k = Q_{k+1} - Q_k:
  //   d_0 = T(0),  d_{k+1} = gamma P [V(Q_k + d_k) - V(Q_k)].
  Matrix q(num_states, num_actions, 0.0);
  Matrix d(num_states, num_actions);
  add_discounted_expectation(
      mdp, std::vector<double>(num_states, soft_value(q.row(0), temperature)),
      &reward.values(), d);

  SolveDiagnostics diagnostics;
  std::vector<double> delta(num_states);
  for (;;) {
    const double change = max_abs(d);
    ++diagnostics.iterations;
    diagnostics.contraction_trace.push_back(change);
    diagnostics.final_residual = change;
    if (change <= threshold) {
      for (std::size_t i = 0; i < q.data().size(); ++i) q.data()[i] += d.data()[i];
      break;
    }
    if (!std::isfinite(change) || diagnostics.iterations >= cap) {
      throw SolveFailure(iteration_message("solve_soft_q", diagnostics, threshold), diagnostics);
    }
    for (StateIndex s = 0; s < num_states; ++s) {
      delta[s] = value_increment(q.row(s), d.row(s), temperature);
    }
    for (std::size_t i = 0; i < q.data().size(); ++i) q.data()[i] += d.data()[i];
    add_discounted_expectation(mdp, delta, nullptr, d);
  }

  QTable table(std::move(q), temperature);
  ValueTable v = soft_values(table);
  StochasticPolicy policy = boltzmann_policy(table);
  return SoftSolution{std::move(table), std::move(v), std::move(policy), std::move(diagnostics)};
}

QTable soft_policy_evaluation(const FiniteMdp& mdp, const RewardTable& reward,
                              const StochasticPolicy& policy, double temperature, double tol,
                              std::optional<std::size_t> max_iter) {
  check_shapes(mdp, reward);
  check_temperature(temperature);
  check_tolerance(tol);
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions()) {
    throw InvalidModel("policy shape does not match the MDP");
  }
  const std::size_t num_states = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  const double effective_bound =
      reward.bound() + temperature * std::log(static_cast<double>(num_actions));
  const std::size_t cap = resolve_max_iter(max_iter, mdp.discount(), effective_bound, tol);
  const double threshold = stopping_threshold(tol, mdp.discount());

  // The operator is affine, so the increments obey d_{k+1} = gamma P_pi d_k.
  std::vector<double> entropy_bonus(num_states);
  for (StateIndex s = 0; s < num_states; ++s) entropy_bonus[s] = temperature * policy.entropy(s);

  Matrix q(num_states, num_actions, 0.0);
  Matrix d(num_states, num_actions);
  add_discounted_expectation(mdp, entropy_bonus, &reward.values(), d);

  SolveDiagnostics diagnostics;
  std::vector<double> expected(num_states);
  for (;;) {
    const double change = max_abs(d);
    ++diagnostics.iterations;
    diagnostics.contraction_trace.push_back(change);
    diagnostics.final_residual = change;
    for (std::size_t i = 0; i < q.data().size(); ++i) q.data()[i] += d.data()[i];
    if (change <= threshold) break;
    if (!std::isfinite(change) || diagnostics.iterations >= cap) {
      throw SolveFailure(iteration_message("soft_policy_evaluation", diagnostics, threshold),
                         diagnostics);
    }
    for (StateIndex s = 0; s < num_states; ++s) {
      double e = 0.0;
      for (ActionIndex a = 0; a < num_actions; ++a) {
        const double p = policy.prob(s, a);
        if (p > 0.0) e += p * d(s, a);
      }
      expected[s] = e;
    }
    add_discounted_expectation(mdp, expected, nullptr, d);
  }
  return QTable(std::move(q), temperature);
}

ResidualDescentResult residual_descent_solve(const FiniteMdp& mdp, const RewardTable& reward,
                                             double temperature, double step, double tol,
                                             std::optional<std::size_t> max_iter) {
  check_shapes(mdp, reward);
  check_temperature(temperature);
  check_tolerance(tol);
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidModel("step must be positive");
  const double gamma = mdp.discount();
  const std::size_t num_states = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  const double threshold = tol * std::min(1.0, 1.0 - gamma);

  std::size_t cap = 1'000'000;
  if (max_iter) {
    cap = *max_iter;
  } else {
    // Error contracts by |1 - step| + step * gamma per sweep.
    const double rate = std::abs(1.0 - step) + step * gamma;
    const double bound =
        reward.bound() + temperature * std::log(static_cast<double>(num_actions));
    if (rate < 1.0) {
      cap = rate <= 0.0 ? 16
                        : default_max_iterations(rate, 2.0 * bound / (1.0 - gamma), threshold);
    }
  }

  Matrix q(num_states, num_actions, 0.0);
  Matrix target(num_states, num_actions);
  std::vector<double> v(num_states);
  SolveDiagnostics diagnostics;
  std::size_t growth_run = 0;
  double previous = std::numeric_limits<double>::infinity();
  for (;;) {
    for (StateIndex s = 0; s < num_states; ++s) v[s] = soft_value(q.row(s), temperature);
    add_discounted_expectation(mdp, v, &reward.values(), target);
    const double residual = max_abs_diff(q, target);
    diagnostics.contraction_trace.push_back(residual);
    diagnostics.final_residual = residual;
    if (residual <= threshold) break;

    growth_run = residual > previous ? growth_run + 1 : 0;
    previous = residual;
    if (!std::isfinite(residual) || growth_run >= kDivergenceWindow) {
      throw SolveFailure("residual_descent_solve: residual diverged after " +
                             std::to_string(diagnostics.iterations) + " sweeps",
                         diagnostics);
    }
    if (diagnostics.iterations >= cap) {
      throw SolveFailure(iteration_message("residual_descent_solve", diagnostics, threshold),
                         diagnostics);
    }
    for (std::size_t i = 0; i < q.data().size(); ++i) {
      q.data()[i] -= step * (q.data()[i] - target.data()[i]);
    }
    ++diagnostics.iterations;
  }
  return ResidualDescentResult{QTable(std::move(q), temperature), std::move(diagnostics)};
}

std::vector<ActionIndex> greedy_actions(const Matrix& q) {
  std::vector<ActionIndex> actions(q.rows(), 0);
  for (StateIndex s = 0; s < q.rows(); ++s) {
    for (ActionIndex a = 1; a < q.cols(); ++a) {
      if (q(s, a) > q(s, actions[s])) actions[s] = a;
    }
  }
  return actions;
}

StochasticPolicy greedy_policy(const Matrix& q) {
  return StochasticPolicy::one_hot(greedy_actions(q), q.cols());
}

HardSolution hard_max_solve(const FiniteMdp& mdp, const RewardTable& reward, double tol,
                            std::optional<std::size_t> max_iter) {
  check_shapes(mdp, reward);
  check_tolerance(tol);
  const std::size_t num_states = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  const std::size_t cap = resolve_max_iter(max_iter, mdp.discount(), reward.bound(), tol);
  const double threshold = stopping_threshold(tol, mdp.discount());

  Matrix q(num_states, num_actions, 0.0);
  Matrix next(num_states, num_actions);
  std::vector<double> v(num_states, 0.0);
  SolveDiagnostics diagnostics;
  for (;;) {
    for (StateIndex s = 0; s < num_states; ++s) {
      const auto row = q.row(s);
      v[s] = *std::max_element(row.begin(), row.end());
    }
    add_discounted_expectation(mdp, v, &reward.values(), next);
    const double change = max_abs_diff(next, q);
    std::swap(q, next);
    ++diagnostics.iterations;
    diagnostics.contraction_trace.push_back(change);
    diagnostics.final_residual = change;
    if (change <= threshold) break;
    if (!std::isfinite(change) || diagnostics.iterations >= cap) {
      throw SolveFailure(iteration_message("hard_max_solve", diagnostics, threshold), diagnostics);
    }
  }
  for (StateIndex s = 0; s < num_states; ++s) {
    const auto row = q.row(s);
    v[s] = *std::max_element(row.begin(), row.end());
  }
  StochasticPolicy policy = greedy_policy(q);
  return HardSolution{std::move(q), std::move(v), std::move(policy), std::move(diagnostics)};
}

}  // namespace softq
