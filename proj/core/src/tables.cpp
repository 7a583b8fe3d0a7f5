#include "softq/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "softq/mdp.hpp"

namespace softq {

QTable::QTable(Matrix values, double temperature)
    : values_(std::move(values)), temperature_(temperature) {
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) {
    throw InvalidModel("temperature must be a finite positive number");
  }
  if (!all_finite(values_)) throw InvalidModel("Q-table has non-finite entries");
}

ValueTable::ValueTable(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidModel("value table has non-finite entries");
  }
}

StochasticPolicy::StochasticPolicy(Matrix probs, Matrix log_probs)
    : probs_(std::move(probs)), log_probs_(std::move(log_probs)) {
  for (StateIndex s = 0; s < probs_.rows(); ++s) {
    double sum = 0.0;
    for (double p : probs_.row(s)) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidModel("policy row " + std::to_string(s) + " has an invalid probability");
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kPolicyRowTolerance)) {
      throw InvalidModel("policy row " + std::to_string(s) + " does not sum to 1");
    }
  }
}

StochasticPolicy StochasticPolicy::from_probs(Matrix probs) {
  Matrix log_probs(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.data().size(); ++i) {
    const double p = probs.data()[i];
    log_probs.data()[i] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  return StochasticPolicy(std::move(probs), std::move(log_probs));
}

StochasticPolicy StochasticPolicy::from_log_probs(Matrix log_probs) {
  Matrix probs(log_probs.rows(), log_probs.cols());
  for (std::size_t i = 0; i < probs.data().size(); ++i) {
    probs.data()[i] = std::exp(log_probs.data()[i]);
  }
  return StochasticPolicy(std::move(probs), std::move(log_probs));
}

StochasticPolicy StochasticPolicy::uniform(std::size_t num_states, std::size_t num_actions) {
  const double p = 1.0 / static_cast<double>(num_actions);
  Matrix probs(num_states, num_actions, p);
  Matrix log_probs(num_states, num_actions, -std::log(static_cast<double>(num_actions)));
  return StochasticPolicy(std::move(probs), std::move(log_probs));
}

StochasticPolicy StochasticPolicy::one_hot(std::span<const ActionIndex> actions,
                                           std::size_t num_actions) {
  Matrix probs(actions.size(), num_actions, 0.0);
  Matrix log_probs(actions.size(), num_actions, -std::numeric_limits<double>::infinity());
  for (StateIndex s = 0; s < actions.size(); ++s) {
    if (actions[s] >= num_actions) throw InvalidModel("one_hot: action index out of range");
    probs(s, actions[s]) = 1.0;
    log_probs(s, actions[s]) = 0.0;
  }
  return StochasticPolicy(std::move(probs), std::move(log_probs));
}

double StochasticPolicy::entropy(StateIndex s) const {
  double h = 0.0;
  for (ActionIndex a = 0; a < num_actions(); ++a) {
    const double p = probs_(s, a);
    if (p > 0.0) h -= p * log_probs_(s, a);
  }
  return h;
}

bool StochasticPolicy::strictly_positive() const {
  return std::all_of(probs_.data().begin(), probs_.data().end(), [](double p) { return p > 0.0; });
}

}  // namespace softq
