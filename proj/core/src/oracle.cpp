#include "softq/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace softq::oracle {

namespace {

using Real = long double;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major long double square system, solved in place by Gaussian
// elimination with partial pivoting.
std::vector<Real> gaussian_solve(std::vector<Real> a, std::vector<Real> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0L) throw std::runtime_error("oracle: singular linear system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const Real f = a[r * n + col] / a[col * n + col];
      if (f == 0.0L) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Real> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Real acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

// I - gamma P_pi over (s,a) pairs.
std::vector<Real> policy_system(const FiniteMdp& mdp, const StochasticPolicy& policy) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  const std::size_t n = S * A;
  if (n > kMaxDenseUnknowns) throw std::invalid_argument("oracle: instance too large for dense solve");
  std::vector<Real> m(n * n, 0.0L);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t row = s * A + a;
      m[row * n + row] += 1.0L;
      for (std::size_t t = 0; t < S; ++t) {
        for (std::size_t b = 0; b < A; ++b) {
          m[row * n + t * A + b] -= static_cast<Real>(mdp.discount()) *
                                    static_cast<Real>(mdp.probability(s, a, t)) *
                                    static_cast<Real>(policy.prob(t, b));
        }
      }
    }
  }
  return m;
}

Matrix to_matrix(const std::vector<Real>& x, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = static_cast<double>(x[i]);
  return out;
}

std::vector<std::vector<Real>> to_real(const Matrix& m) {
  std::vector<std::vector<Real>> out(m.rows(), std::vector<Real>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

// Finite-horizon soft Q in long double, with the soft value of the result.
struct RealSoftQ {
  std::vector<std::vector<Real>> q;
  std::vector<Real> v;
};

RealSoftQ real_soft_q(const FiniteMdp& mdp, const Matrix& reward, std::size_t horizon) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<std::vector<Real>> q(S, std::vector<Real>(A, 0.0L));
  std::vector<Real> v(S);
  auto values = [&] {
    for (std::size_t s = 0; s < S; ++s) {
      Real sum = 0.0L;
      for (std::size_t a = 0; a < A; ++a) sum += std::exp(q[s][a]);
      if (!std::isfinite(sum)) throw std::runtime_error("oracle: extended precision overflow");
      v[s] = std::log(sum);
    }
  };
  for (std::size_t k = 0; k < horizon; ++k) {
    values();
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        Real e = 0.0L;
        for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * v[t];
        q[s][a] = static_cast<Real>(reward(s, a)) + static_cast<Real>(mdp.discount()) * e;
      }
    }
  }
  values();
  return {std::move(q), std::move(v)};
}

}  // namespace

HorizonConfig HorizonConfig::for_tolerance(double discount, double bound, double tol) {
  HorizonConfig h;
  if (discount <= 0.0 || bound <= 0.0) return h;
  const double n = std::ceil(std::log(tol * (1.0 - discount) / (2.0 * bound)) / std::log(discount));
  if (n > 1.0) h.horizon = static_cast<std::size_t>(n);
  return h;
}

std::optional<long double> direct_soft_value(std::span<const double> q_row, double temperature) {
  Real sum = 0.0L;
  for (double x : q_row) sum += std::exp(static_cast<Real>(x) / static_cast<Real>(temperature));
  if (!std::isfinite(sum) || sum == 0.0L) return std::nullopt;
  return static_cast<Real>(temperature) * std::log(sum);
}

long double direct_renyi_half(std::span<const double> p, std::span<const double> q) {
  Real bc = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    bc += std::sqrt(static_cast<Real>(p[i]) * static_cast<Real>(q[i]));
  }
  if (bc == 0.0L) return std::numeric_limits<Real>::infinity();
  return -2.0L * std::log(bc);
}

std::optional<Matrix> naive_soft_backup(const FiniteMdp& mdp, const RewardTable& reward,
                                        const Matrix& q, double temperature) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<Real> v(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto value = direct_soft_value(q.row(s), temperature);
    if (!value) return std::nullopt;
    v[s] = *value;
  }
  Matrix out(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      Real e = 0.0L;
      for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * v[t];
      out(s, a) = static_cast<double>(static_cast<Real>(reward(s, a)) +
                                      static_cast<Real>(mdp.discount()) * e);
    }
  }
  return out;
}

std::optional<QTable> finite_horizon_soft_q(const FiniteMdp& mdp, const RewardTable& reward,
                                            double temperature, std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("oracle: horizon must be >= 1");
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  const Real alpha = temperature;
  // Iterates stay in long double between steps; only the result is rounded.
  std::vector<std::vector<Real>> q(S, std::vector<Real>(A, 0.0L));
  std::vector<Real> v(S);
  for (std::size_t k = 0; k < horizon; ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      Real sum = 0.0L;
      for (std::size_t a = 0; a < A; ++a) sum += std::exp(q[s][a] / alpha);
      if (!std::isfinite(sum) || sum == 0.0L) return std::nullopt;
      v[s] = alpha * std::log(sum);
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        Real e = 0.0L;
        for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * v[t];
        q[s][a] = static_cast<Real>(reward(s, a)) + static_cast<Real>(mdp.discount()) * e;
      }
    }
  }
  Matrix out(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) out(s, a) = static_cast<double>(q[s][a]);
  }
  return QTable(std::move(out), temperature);
}

QTable linear_solve_policy_eval(const FiniteMdp& mdp, const RewardTable& reward,
                                const StochasticPolicy& policy, double temperature) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<Real> h(S, 0.0L);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const Real p = policy.prob(s, a);
      if (p > 0.0L) h[s] -= static_cast<Real>(temperature) * p * static_cast<Real>(policy.log_prob(s, a));
    }
  }
  std::vector<Real> rhs(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      Real e = 0.0L;
      for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * h[t];
      rhs[s * A + a] = static_cast<Real>(reward(s, a)) + static_cast<Real>(mdp.discount()) * e;
    }
  }
  const auto x = gaussian_solve(policy_system(mdp, policy), std::move(rhs), S * A);
  return QTable(to_matrix(x, S, A), temperature);
}

Matrix unrolled_c_star(const FiniteMdp& mdp, const StochasticPolicy& pi1,
                       const StochasticPolicy& pi2, double divergence_factor,
                       std::size_t horizon) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<Real> div(S);
  for (std::size_t s = 0; s < S; ++s) {
    div[s] = direct_renyi_half(pi1.row(s), pi2.row(s));
    if (std::isinf(div[s])) return Matrix(S, A, kInf);
  }
  std::vector<std::vector<Real>> c(S, std::vector<Real>(A, 0.0L));
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<Real> w(S);
    for (std::size_t t = 0; t < S; ++t) {
      Real best = c[t][0];
      for (std::size_t b = 1; b < A; ++b) best = std::max(best, c[t][b]);
      w[t] = static_cast<Real>(divergence_factor) * div[t] + best;
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        Real e = 0.0L;
        for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * w[t];
        c[s][a] = static_cast<Real>(mdp.discount()) * e;
      }
    }
  }
  Matrix out(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) out(s, a) = static_cast<double>(c[s][a]);
  }
  return out;
}

Matrix unrolled_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma,
                       const Matrix& c_star, std::size_t horizon) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  if (!all_finite(c_star)) return Matrix(S, A, kInf);
  const auto c = to_real(c_star);
  std::vector<std::vector<Real>> d(S, std::vector<Real>(A, 0.0L));
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<Real> w(S, 0.0L);
    for (std::size_t t = 0; t < S; ++t) {
      for (std::size_t b = 0; b < A; ++b) {
        w[t] += static_cast<Real>(pi_sigma.prob(t, b)) * (c[t][b] + d[t][b]);
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        Real e = 0.0L;
        for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * w[t];
        d[s][a] = static_cast<Real>(mdp.discount()) * e;
      }
    }
  }
  Matrix out(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) out(s, a) = static_cast<double>(d[s][a]);
  }
  return out;
}

Matrix linear_solve_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma,
                           const Matrix& c_star) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  if (!all_finite(c_star)) return Matrix(S, A, kInf);
  std::vector<Real> w(S, 0.0L);
  for (std::size_t t = 0; t < S; ++t) {
    for (std::size_t b = 0; b < A; ++b) {
      w[t] += static_cast<Real>(pi_sigma.prob(t, b)) * static_cast<Real>(c_star(t, b));
    }
  }
  std::vector<Real> rhs(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      Real e = 0.0L;
      for (std::size_t t = 0; t < S; ++t) e += static_cast<Real>(mdp.probability(s, a, t)) * w[t];
      rhs[s * A + a] = static_cast<Real>(mdp.discount()) * e;
    }
  }
  return to_matrix(gaussian_solve(policy_system(mdp, pi_sigma), std::move(rhs), S * A), S, A);
}

Matrix mean_table(std::span<const Matrix> tables) {
  if (tables.empty()) throw std::invalid_argument("oracle: mean of no tables");
  Matrix out(tables[0].rows(), tables[0].cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      Real sum = 0.0L;
      for (const Matrix& m : tables) sum += m(r, c);
      out(r, c) = static_cast<double>(sum / static_cast<Real>(tables.size()));
    }
  }
  return out;
}

std::vector<std::vector<double>> chain_marginals(const FiniteMdp& mdp,
                                                 const StochasticPolicy& policy,
                                                 StateIndex start, std::size_t horizon) {
  const std::size_t S = mdp.num_states();
  std::vector<Real> d(S, 0.0L);
  d[start] = 1.0L;
  std::vector<std::vector<double>> out;
  auto record = [&] {
    std::vector<double> row(S);
    for (std::size_t s = 0; s < S; ++s) row[s] = static_cast<double>(d[s]);
    out.push_back(std::move(row));
  };
  record();
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<Real> next(S, 0.0L);
    for (std::size_t s = 0; s < S; ++s) {
      if (d[s] == 0.0L) continue;
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        const Real pa = d[s] * static_cast<Real>(policy.prob(s, a));
        if (pa == 0.0L) continue;
        for (std::size_t t = 0; t < S; ++t) next[t] += pa * static_cast<Real>(mdp.probability(s, a, t));
      }
    }
    d = std::move(next);
    record();
  }
  return out;
}

double visit_probability(const FiniteMdp& mdp, const StochasticPolicy& policy, StateIndex start,
                         const std::set<StateIndex>& targets, std::size_t horizon) {
  if (targets.count(start)) return 1.0;
  const std::size_t S = mdp.num_states();
  // Mass that has not yet touched a target, plus absorbed mass.
  std::vector<Real> d(S, 0.0L);
  d[start] = 1.0L;
  Real absorbed = 0.0L;
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<Real> next(S, 0.0L);
    for (std::size_t s = 0; s < S; ++s) {
      if (d[s] == 0.0L) continue;
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        const Real pa = d[s] * static_cast<Real>(policy.prob(s, a));
        if (pa == 0.0L) continue;
        for (std::size_t t = 0; t < S; ++t) next[t] += pa * static_cast<Real>(mdp.probability(s, a, t));
      }
    }
    for (StateIndex t : targets) {
      absorbed += next[t];
      next[t] = 0.0L;
    }
    d = std::move(next);
  }
  return static_cast<double>(absorbed);
}

BoundCertificate exhaustive_tiny_certificate(const FiniteMdp& mdp, const TaskSet& tasks,
                                             std::array<std::size_t, 2> subset, double tol,
                                             double divergence_factor) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  if (S > kTinyStates || A > kTinyActions) {
    throw std::invalid_argument("oracle: tiny certificate needs at most 3 states and 2 actions");
  }
  const Matrix& r1 = tasks.reward(subset[0]).values();
  const Matrix& r2 = tasks.reward(subset[1]).values();
  Matrix rc(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      rc(s, a) = static_cast<double>((static_cast<Real>(r1(s, a)) + r2(s, a)) / 2.0L);
    }
  }
  const double bound = std::max({max_abs(r1), max_abs(r2)}) + std::log(static_cast<double>(A));
  // Truncation error well below tol so the comparison measures the production
  // code's error.
  const std::size_t horizon =
      HorizonConfig::for_tolerance(mdp.discount(), bound, tol * 1e-3).horizon;

  const RealSoftQ q1 = real_soft_q(mdp, r1, horizon);
  const RealSoftQ q2 = real_soft_q(mdp, r2, horizon);
  const RealSoftQ qc = real_soft_q(mdp, rc, horizon);

  auto policy_of = [&](const std::vector<std::vector<Real>>& q, const std::vector<Real>& v) {
    Matrix log_probs(S, A);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) log_probs(s, a) = static_cast<double>(q[s][a] - v[s]);
    }
    return StochasticPolicy::from_log_probs(std::move(log_probs));
  };
  const StochasticPolicy pi1 = policy_of(q1.q, q1.v);
  const StochasticPolicy pi2 = policy_of(q2.q, q2.v);

  std::vector<std::vector<Real>> q_sigma(S, std::vector<Real>(A));
  std::vector<Real> v_sigma(S);
  for (std::size_t s = 0; s < S; ++s) {
    Real sum = 0.0L;
    for (std::size_t a = 0; a < A; ++a) {
      q_sigma[s][a] = (q1.q[s][a] + q2.q[s][a]) / 2.0L;
      sum += std::exp(q_sigma[s][a]);
    }
    v_sigma[s] = std::log(sum);
  }
  const StochasticPolicy pi_sigma = policy_of(q_sigma, v_sigma);
  const QTable q_pi = linear_solve_policy_eval(mdp, RewardTable(rc), pi_sigma, 1.0);

  BoundCertificate cert;
  cert.subset = subset;
  cert.temperature = 1.0;
  cert.divergence_factor = divergence_factor;
  cert.c_star = unrolled_c_star(mdp, pi1, pi2, divergence_factor, horizon);
  cert.d_star = linear_solve_d_star(mdp, pi_sigma, cert.c_star);
  cert.lemma_upper_slack = Matrix(S, A);
  cert.lemma_lower_slack = Matrix(S, A);
  cert.theorem_slack = Matrix(S, A);
  cert.corollary_upper_slack.assign(S, 0.0);
  cert.corollary_lower_slack.assign(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    Real c_max = cert.c_star(s, 0);
    for (std::size_t a = 0; a < A; ++a) {
      const Real c = cert.c_star(s, a);
      c_max = std::max(c_max, c);
      cert.lemma_upper_slack(s, a) = static_cast<double>(q_sigma[s][a] - qc.q[s][a]);
      cert.lemma_lower_slack(s, a) = static_cast<double>(qc.q[s][a] - q_sigma[s][a] + c);
      cert.theorem_slack(s, a) = static_cast<double>(static_cast<Real>(q_pi(s, a)) - qc.q[s][a] +
                                                     static_cast<Real>(cert.d_star(s, a)));
    }
    cert.corollary_upper_slack[s] = static_cast<double>(v_sigma[s] - qc.v[s]);
    cert.corollary_lower_slack[s] = static_cast<double>(qc.v[s] - v_sigma[s] + c_max);
  }
  return cert;
}

}  // namespace softq::oracle
