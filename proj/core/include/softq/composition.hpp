#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "softq/certificate.hpp"
#include "softq/mdp.hpp"
#include "softq/soft_solver.hpp"
#include "softq/tables.hpp"

namespace softq {

inline constexpr double kDistributionSumTolerance = 1e-10;

// D_1/2(p || q) = -2 ln sum_a sqrt(p_a q_a). Symmetric, exactly 0 for p == q,
// +inf for disjoint supports. Throws InvalidModel unless both inputs sum to 1
// within 1e-10.
double renyi_half(std::span<const double> p, std::span<const double> q);

// D_1/2 between the two policies' rows, one entry per state.
std::vector<double> state_divergences(const StochasticPolicy& pi1, const StochasticPolicy& pi2);

struct ConstituentSolution {
  QTable q;
  StochasticPolicy policy;
};

struct ComposedTask {
  std::vector<std::size_t> subset;
  RewardTable compound_reward;
  QTable q_sigma;
  StochasticPolicy pi_sigma;
};

// Mean of the selected rewards.
RewardTable compound_reward(const TaskSet& tasks, std::span<const std::size_t> subset);

// solutions[i] belongs to task subset[i]. All Q-tables must share the MDP's
// shape and one temperature.
ComposedTask compose(const FiniteMdp& mdp, const TaskSet& tasks,
                     std::span<const std::size_t> subset,
                     std::span<const ConstituentSolution> solutions);

// One application of C <- gamma E_s'[factor * div(s') + max_a' C(s',a')].
Matrix c_backup(const FiniteMdp& mdp, std::span<const double> divergences, const Matrix& c,
                double divergence_factor);

// Fixed point of c_backup from C = 0. +inf everywhere when any state's
// divergence is infinite.
Matrix compute_c_star(const FiniteMdp& mdp, const StochasticPolicy& pi1,
                      const StochasticPolicy& pi2,
                      double divergence_factor = kProofDivergenceFactor,
                      double tol = kDefaultTolerance,
                      std::optional<std::size_t> max_iter = std::nullopt);

// One application of D <- gamma E_s'[E_{a'~pi_sigma}[C*(s',a') + D(s',a')]].
Matrix d_backup(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma, const Matrix& c_star,
                const Matrix& d);

Matrix compute_d_star(const FiniteMdp& mdp, const StochasticPolicy& pi_sigma, const Matrix& c_star,
                      double tol = kDefaultTolerance,
                      std::optional<std::size_t> max_iter = std::nullopt);

struct CertifyOptions {
  double temperature = 1.0;
  double tol = kDefaultTolerance;
  double divergence_factor = kProofDivergenceFactor;
};

// Solves both constituents and the compound task, composes, evaluates the
// composed policy and fills every slack. Only pairs at temperature 1 are
// accepted; other subset sizes throw InvalidModel("... pairwise only ...").
BoundCertificate certify(const FiniteMdp& mdp, const TaskSet& tasks,
                         std::span<const std::size_t> subset, const CertifyOptions& options = {});
BoundCertificate certify(const FiniteMdp& mdp, const TaskSet& tasks,
                         std::array<std::size_t, 2> subset, const CertifyOptions& options = {});

}  // namespace softq
