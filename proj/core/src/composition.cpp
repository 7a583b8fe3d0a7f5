#include "softq/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace softq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_distribution(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidModel(std::string("renyi_half: ") + name + " has an invalid entry");
    }
    sum += x;
  }
  if (!(std::abs(sum - 1.0) <= kDistributionSumTolerance)) {
    throw InvalidModel(std::string("renyi_half: ") + name + " does not sum to 1");
  }
}

void check_policy_shape(const FiniteMdp& mdp, const StochasticPolicy& pi) {
  if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions()) {
    throw InvalidModel("policy shape does not match the MDP");
  }
}

std::vector<double> row_max(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (StateIndex s = 0; s < m.rows(); ++s) {
    const auto row = m.row(s);
    out[s] = *std::max_element(row.begin(), row.end());
  }
  return out;
}

// out(s,a) = gamma * sum_s' P(s'|s,a) w(s')
Matrix discounted_expectation(const FiniteMdp& mdp, std::span<const double> w) {
  Matrix out(mdp.num_states(), mdp.num_actions());
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      double e = 0.0;
      const auto next = mdp.successors(s, a);
      for (StateIndex t = 0; t < next.size(); ++t) e += next[t] * w[t];
      out(s, a) = mdp.discount() * e;
    }
  }
  return out;
}

struct FixedPointLoop {
  double threshold;
  std::size_t cap;
  const char* name;
  SolveDiagnostics diagnostics;

  // Records one step; true once converged.
  bool step(const Matrix& next, const Matrix& current) {
    const double change = max_abs_diff(next, current);
    ++diagnostics.iterations;
    diagnostics.contraction_trace.push_back(change);
    diagnostics.final_residual = change;
    if (change <= threshold) return true;
    if (!std::isfinite(change) || diagnostics.iterations >= cap) {
      throw SolveFailure(std::string(name) + ": no convergence after " +
                             std::to_string(diagnostics.iterations) + " iterations",
                         diagnostics);
    }
    return false;
  }
};

}  // namespace

double renyi_half(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidModel("renyi_half: size mismatch");
  check_distribution(p, "p");
  check_distribution(q, "q");
  double bc = 0.0;
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double sp = std::sqrt(p[i]);
    const double sq = std::sqrt(q[i]);
    bc += sp * sq;
    h += (sp - sq) * (sp - sq);
  }
  if (bc == 0.0) return kInf;
  // sum sqrt(p q) = 1 - h/2 for normalized inputs; log1p keeps small
  // divergences accurate, the direct log is used far from zero.
  h *= 0.5;
  const double d = h <= 0.5 ? -2.0 * std::log1p(-h) : -2.0 * std::log(bc);
  return std::max(d, 0.0) + 0.0;
}

std::vector<double> state_divergences(const StochasticPolicy& pi1, const StochasticPolicy& pi2) {
  if (pi1.num_states() != pi2.num_states() || pi1.num_actions() != pi2.num_actions()) {
    throw InvalidModel("policies have different shapes");
  }
  std::vector<double> out(pi1.num_states());
  for (StateIndex s = 0; s < out.size(); ++s) out[s] = renyi_half(pi1.row(s), pi2.row(s));
  return out;
}

RewardTable compound_reward(const TaskSet& tasks, std::span<const std::size_t> subset) {
  if (subset.empty()) throw InvalidModel("subset must not be empty");
  const Matrix& first = tasks.reward(subset[0]).values();
  Matrix sum(first.rows(), first.cols(), 0.0);
  for (std::size_t index : subset) {
    if (index >= tasks.size()) throw InvalidModel("task index out of range");
    const auto values = tasks.reward(index).values().data();
    for (std::size_t i = 0; i < values.size(); ++i) sum.data()[i] += values[i];
  }
  const double n = static_cast<double>(subset.size());
  for (double& x : sum.data()) x /= n;
  return RewardTable(std::move(sum));
}

ComposedTask compose(const FiniteMdp& mdp, const TaskSet& tasks,
                     std::span<const std::size_t> subset,
                     std::span<const ConstituentSolution> solutions) {
  if (subset.empty()) throw InvalidModel("subset must not be empty");
  if (solutions.size() != subset.size()) {
    throw InvalidModel("one constituent solution is required per subset entry");
  }
  const double temperature = solutions[0].q.temperature();
  Matrix sum(mdp.num_states(), mdp.num_actions(), 0.0);
  for (const auto& solution : solutions) {
    if (solution.q.temperature() != temperature) {
      throw InvalidModel("constituent solutions have mismatched temperatures");
    }
    if (solution.q.num_states() != mdp.num_states() ||
        solution.q.num_actions() != mdp.num_actions()) {
      throw InvalidModel("constituent Q-table shape does not match the MDP");
    }
    check_policy_shape(mdp, solution.policy);
    const auto values = solution.q.values().data();
    for (std::size_t i = 0; i < values.size(); ++i) sum.data()[i] += values[i];
  }
  const double n = static_cast<double>(solutions.size());
  for (double& x : sum.data()) x /= n;

  QTable q_sigma(std::move(sum), temperature);
  StochasticPolicy pi_sigma = boltzmann_policy(q_sigma);
  return ComposedTask{std::vector<std::size_t>(subset.begin(), subset.end()),
                      compound_reward(tasks, subset), std::move(q_sigma), std::move(pi_sigma)};
}

Matrix c_backup(const FiniteMdp& mdp, std::span<const double> divergences, const Matrix& c,
                double divergence_factor) {
  std::vector<double> w = row_max(c);
  for (StateIndex s = 0; s < w.size(); ++s) w[s] += divergence_factor * divergences[s];
  return discounted_expectation(mdp, w);
}

Matrix compute_c_star(const FiniteMdp& mdp, const StochasticPolicy& pi1,
                      const StochasticPolicy& pi2, double divergence_factor, double tol,
                      std::optional<std::size_t> max_iter) {
  check_policy_shape(mdp, pi1);
  check_policy_shape(mdp, pi2);
  if (!(divergence_factor >= 0.0)) throw InvalidModel("divergence factor must be >= 0");
  const std::vector<double> div = state_divergences(pi1, pi2);
  const double max_div = *std::max_element(div.begin(), div.end());
  if (std::isinf(max_div)) return Matrix(mdp.num_states(), mdp.num_actions(), kInf);

  FixedPointLoop loop{
      stopping_threshold(tol, mdp.discount()),
      max_iter.value_or(default_max_iterations(mdp.discount(), divergence_factor * max_div, tol)),
      "compute_c_star",
      {}};
  Matrix c(mdp.num_states(), mdp.num_actions(), 0.0);
  for (;;) {
    Matrix next = c_backup(mdp, div, c, divergence_factor);
    const bool done = loop.step(next, c);
    c = std::move(next);
    if (done) return c;
  }
}

Matrix d_backup(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma, const Matrix& c_star,
                const Matrix& d) {
  std::vector<double> w(mdp.num_states(), 0.0);
  for (StateIndex s = 0; s < w.size(); ++s) {
    double e = 0.0;
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const double p = pi_sigma.prob(s, a);
      if (p > 0.0) e += p * (c_star(s, a) + d(s, a));
    }
    w[s] = e;
  }
  return discounted_expectation(mdp, w);
}

Matrix compute_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma, const Matrix& c_star,
                      double tol, std::optional<std::size_t> max_iter) {
  check_policy_shape(mdp, pi_sigma);
  if (c_star.rows() != mdp.num_states() || c_star.cols() != mdp.num_actions()) {
    throw InvalidModel("C* shape does not match the MDP");
  }
  if (!all_finite(c_star)) return Matrix(mdp.num_states(), mdp.num_actions(), kInf);
  if (!(min_entry(c_star) >= 0.0)) throw InvalidModel("C* must be non-negative");

  FixedPointLoop loop{
      stopping_threshold(tol, mdp.discount()),
      max_iter.value_or(default_max_iterations(mdp.discount(), max_abs(c_star), tol)),
      "compute_d_star",
      {}};
  Matrix d(mdp.num_states(), mdp.num_actions(), 0.0);
  for (;;) {
    Matrix next = d_backup(mdp, pi_sigma, c_star, d);
    const bool done = loop.step(next, d);
    d = std::move(next);
    if (done) return d;
  }
}

BoundCertificate certify(const FiniteMdp& mdp, const TaskSet& tasks,
                         std::span<const std::size_t> subset, const CertifyOptions& options) {
  if (subset.size() != 2) {
    throw InvalidModel("certify: pairwise only (got a subset of " +
                       std::to_string(subset.size()) + " tasks)");
  }
  return certify(mdp, tasks, std::array<std::size_t, 2>{subset[0], subset[1]}, options);
}

BoundCertificate certify(const FiniteMdp& mdp, const TaskSet& tasks,
                         std::array<std::size_t, 2> subset, const CertifyOptions& options) {
  if (options.temperature != 1.0) {
    throw InvalidModel("certify: bounds are established for temperature 1 only");
  }
  for (std::size_t index : subset) {
    if (index >= tasks.size()) throw InvalidModel("certify: task index out of range");
  }
  const double alpha = options.temperature;
  const double tol = options.tol;

  auto solve = [&](const RewardTable& reward, const char* what) {
    try {
      return solve_soft_q(mdp, reward, alpha, tol);
    } catch (const SolveFailure& e) {
      throw SolveFailure(std::string("certify (") + what + "): " + e.what(), e.diagnostics());
    }
  };

  const SoftSolution first = solve(tasks.reward(subset[0]), "first constituent");
  const SoftSolution second = solve(tasks.reward(subset[1]), "second constituent");
  const std::array<ConstituentSolution, 2> constituents{
      ConstituentSolution{first.q, first.policy}, ConstituentSolution{second.q, second.policy}};
  const ComposedTask composed = compose(mdp, tasks, subset, constituents);
  const SoftSolution direct = solve(composed.compound_reward, "compound task");
  const QTable q_pi =
      soft_policy_evaluation(mdp, composed.compound_reward, composed.pi_sigma, alpha, tol);

  BoundCertificate cert;
  cert.subset = subset;
  cert.temperature = alpha;
  cert.divergence_factor = options.divergence_factor;
  cert.c_star = compute_c_star(mdp, first.policy, second.policy, options.divergence_factor, tol);
  cert.d_star = compute_d_star(mdp, composed.pi_sigma, cert.c_star, tol);

  const std::size_t num_states = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  const Matrix& q_sigma = composed.q_sigma.values();
  const Matrix& q_star = direct.q.values();
  cert.lemma_upper_slack = Matrix(num_states, num_actions);
  cert.lemma_lower_slack = Matrix(num_states, num_actions);
  cert.theorem_slack = Matrix(num_states, num_actions);
  for (StateIndex s = 0; s < num_states; ++s) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      cert.lemma_upper_slack(s, a) = q_sigma(s, a) - q_star(s, a);
      cert.lemma_lower_slack(s, a) = q_star(s, a) - q_sigma(s, a) + cert.c_star(s, a);
      cert.theorem_slack(s, a) = q_pi(s, a) - q_star(s, a) + cert.d_star(s, a);
    }
  }
  const ValueTable v_sigma = soft_values(composed.q_sigma);
  const std::vector<double> c_max = row_max(cert.c_star);
  cert.corollary_upper_slack.resize(num_states);
  cert.corollary_lower_slack.resize(num_states);
  for (StateIndex s = 0; s < num_states; ++s) {
    cert.corollary_upper_slack[s] = v_sigma[s] - direct.v[s];
    cert.corollary_lower_slack[s] = direct.v[s] - v_sigma[s] + c_max[s];
  }
  return cert;
}

}  // namespace softq
