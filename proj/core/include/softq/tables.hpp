#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softq/matrix.hpp"

namespace softq {

// Action values Q[s][a] together with the temperature they were computed at.
class QTable {
 public:
  QTable(Matrix values, double temperature);

  const Matrix& values() const { return values_; }
  double temperature() const { return temperature_; }
  double operator()(StateIndex s, ActionIndex a) const { return values_(s, a); }
  std::span<const double> row(StateIndex s) const { return values_.row(s); }
  std::size_t num_states() const { return values_.rows(); }
  std::size_t num_actions() const { return values_.cols(); }

 private:
  Matrix values_;
  double temperature_;
};

class ValueTable {
 public:
  explicit ValueTable(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  double operator[](StateIndex s) const { return values_[s]; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

inline constexpr double kPolicyRowTolerance = 1e-12;

// Row-stochastic pi[s][a] stored alongside log pi. Zero-probability actions
// carry log-probability -inf.
class StochasticPolicy {
 public:
  static StochasticPolicy from_probs(Matrix probs);
  static StochasticPolicy from_log_probs(Matrix log_probs);
  static StochasticPolicy uniform(std::size_t num_states, std::size_t num_actions);
  static StochasticPolicy one_hot(std::span<const ActionIndex> actions, std::size_t num_actions);

  const Matrix& probs() const { return probs_; }
  const Matrix& log_probs() const { return log_probs_; }
  double prob(StateIndex s, ActionIndex a) const { return probs_(s, a); }
  double log_prob(StateIndex s, ActionIndex a) const { return log_probs_(s, a); }
  std::span<const double> row(StateIndex s) const { return probs_.row(s); }
  std::size_t num_states() const { return probs_.rows(); }
  std::size_t num_actions() const { return probs_.cols(); }

  // Shannon entropy of pi(.|s) in nats, with 0 log 0 = 0.
  double entropy(StateIndex s) const;
  bool strictly_positive() const;

 private:
  StochasticPolicy(Matrix probs, Matrix log_probs);

  Matrix probs_;
  Matrix log_probs_;
};

struct SolveDiagnostics {
  std::size_t iterations = 0;
  double final_residual = 0.0;
  // Sup-norm change produced by each iteration, in order.
  std::vector<double> contraction_trace;
};

// A fixed-point loop stopped without meeting its tolerance.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& what, SolveDiagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const SolveDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  SolveDiagnostics diagnostics_;
};

}  // namespace softq
