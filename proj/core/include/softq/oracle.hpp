#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "softq/certificate.hpp"
#include "softq/mdp.hpp"
#include "softq/tables.hpp"

// Brute-force reference implementations. Everything here accumulates in long
// double, uses the textbook (unshifted, unrolled or dense-solve) form, and
// links against the data model only.
namespace softq::oracle {

struct HorizonConfig {
  std::size_t horizon = 1;

  // H = ceil(log(tol (1-gamma) / (2B)) / log gamma), at least 1.
  static HorizonConfig for_tolerance(double discount, double bound, double tol);
};

// alpha log sum exp(q/alpha) without max-shift. nullopt on overflow.
std::optional<long double> direct_soft_value(std::span<const double> q_row, double temperature);

// -2 ln sum sqrt(p q); +inf for disjoint supports.
long double direct_renyi_half(std::span<const double> p, std::span<const double> q);

// One backup with unshifted log-sum-exp. nullopt on overflow.
std::optional<Matrix> naive_soft_backup(const FiniteMdp& mdp, const RewardTable& reward,
                                        const Matrix& q, double temperature);

// `horizon` backups from Q = 0, no early stopping. nullopt on overflow.
std::optional<QTable> finite_horizon_soft_q(const FiniteMdp& mdp, const RewardTable& reward,
                                            double temperature, std::size_t horizon);

inline constexpr std::size_t kMaxDenseUnknowns = 4096;

// Dense solve of (I - gamma P_pi) q = r + gamma P h, h(s) = alpha H(pi(.|s)).
QTable linear_solve_policy_eval(const FiniteMdp& mdp, const RewardTable& reward,
                                const StochasticPolicy& policy, double temperature);

// `horizon` steps of the C recursion from zero; +inf everywhere when a state's
// divergence is infinite.
Matrix unrolled_c_star(const FiniteMdp& mdp, const StochasticPolicy& pi1,
                       const StochasticPolicy& pi2, double divergence_factor,
                       std::size_t horizon);

// `horizon` steps of the D recursion from zero.
Matrix unrolled_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma,
                       const Matrix& c_star, std::size_t horizon);

// Dense solve of (I - gamma P_pi) D = gamma P_pi C.
Matrix linear_solve_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma,
                           const Matrix& c_star);

// Entrywise mean of the tables.
Matrix mean_table(std::span<const Matrix> tables);

// Distribution of s_t for t = 0..horizon under the policy from `start`.
std::vector<std::vector<double>> chain_marginals(const FiniteMdp& mdp,
                                                 const StochasticPolicy& policy,
                                                 StateIndex start, std::size_t horizon);

// Probability that s_0..s_horizon visits any of `targets`.
double visit_probability(const FiniteMdp& mdp, const StochasticPolicy& policy, StateIndex start,
                         const std::set<StateIndex>& targets, std::size_t horizon);

inline constexpr std::size_t kTinyStates = 3;
inline constexpr std::size_t kTinyActions = 2;

// Every certificate field recomputed at temperature 1 for instances with at
// most 3 states and 2 actions. Throws std::invalid_argument above the cap and
// std::runtime_error if extended precision overflows.
BoundCertificate exhaustive_tiny_certificate(const FiniteMdp& mdp, const TaskSet& tasks,
                                             std::array<std::size_t, 2> subset, double tol,
                                             double divergence_factor = kProofDivergenceFactor);

}  // namespace softq::oracle
