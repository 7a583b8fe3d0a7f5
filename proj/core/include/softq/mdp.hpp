#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softq/matrix.hpp"

namespace softq {

inline constexpr double kRowSumTolerance = 1e-12;

// Raised when an MDP or reward table violates its invariants.
class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Finite discounted MDP with a dense transition tensor P[s][a][s'].
//
// Construction only checks that the tensor has the declared shape; use
// validate_mdp() for the stochastic invariants, or make_checked_mdp() to
// construct and validate in one step.
class FiniteMdp {
 public:
  FiniteMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
            double discount, std::vector<bool> terminal = {});

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double discount() const { return discount_; }

  double probability(StateIndex s, ActionIndex a, StateIndex next) const {
    return transition_[(s * num_actions_ + a) * num_states_ + next];
  }
  // Successor distribution P[s][a][.].
  std::span<const double> successors(StateIndex s, ActionIndex a) const {
    return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
  }
  const std::vector<double>& transition() const { return transition_; }

  bool is_terminal(StateIndex s) const { return !terminal_.empty() && terminal_[s]; }
  const std::vector<bool>& terminal_mask() const { return terminal_; }

  friend bool operator==(const FiniteMdp&, const FiniteMdp&) = default;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> transition_;
  double discount_;
  std::vector<bool> terminal_;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
};

ValidationResult validate_mdp(const FiniteMdp& mdp);

// Throws InvalidModel listing every violation.
FiniteMdp make_checked_mdp(FiniteMdp mdp);

// Reward matrix r[s][a] with a recorded bound B >= max |r|.
class RewardTable {
 public:
  explicit RewardTable(Matrix values);
  RewardTable(Matrix values, double bound);

  const Matrix& values() const { return values_; }
  double bound() const { return bound_; }
  double operator()(StateIndex s, ActionIndex a) const { return values_(s, a); }
  std::size_t num_states() const { return values_.rows(); }
  std::size_t num_actions() const { return values_.cols(); }

 private:
  Matrix values_;
  double bound_;
};

// K labelled reward functions over one MDP.
class TaskSet {
 public:
  TaskSet() = default;
  TaskSet(const FiniteMdp& mdp, std::vector<RewardTable> rewards, std::vector<std::string> labels);

  std::size_t size() const { return rewards_.size(); }
  const RewardTable& reward(std::size_t i) const { return rewards_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Throws std::out_of_range for unknown labels.
  std::size_t index_of(const std::string& label) const;

 private:
  std::vector<RewardTable> rewards_;
  std::vector<std::string> labels_;
};

// Random instance generator. Each successor is kept with probability
// `sparsity` (at least one per row) and weighted by a uniform positive draw;
// rows are then normalized. Deterministic per seed.
FiniteMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions,
                     double discount, double sparsity = 1.0);

// Entries uniform in [-bound, bound], deterministic per seed.
RewardTable random_reward(std::uint64_t seed, const FiniteMdp& mdp, double bound = 1.0);

}  // namespace softq
