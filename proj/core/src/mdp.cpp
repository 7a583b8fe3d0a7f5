#include "softq/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "softq/random.hpp"

namespace softq {

namespace {

std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

FiniteMdp::FiniteMdp(std::size_t num_states, std::size_t num_actions,
                     std::vector<double> transition, double discount, std::vector<bool> terminal)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      discount_(discount),
      terminal_(std::move(terminal)) {
  if (num_states_ == 0 || num_actions_ == 0) {
    throw InvalidModel("an MDP needs at least one state and one action");
  }
  if (transition_.size() != num_states_ * num_actions_ * num_states_) {
    throw InvalidModel("transition tensor size does not match num_states x num_actions x num_states");
  }
  if (!terminal_.empty() && terminal_.size() != num_states_) {
    throw InvalidModel("terminal mask must have one entry per state");
  }
}

ValidationResult validate_mdp(const FiniteMdp& mdp) {
  ValidationResult result;
  auto& v = result.violations;
  const double gamma = mdp.discount();
  if (!(gamma < 1.0)) v.push_back("discount must be < 1");
  if (!(gamma >= 0.0)) v.push_back("discount must be >= 0");

  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      auto row = mdp.successors(s, a);
      double sum = 0.0;
      for (StateIndex next = 0; next < row.size(); ++next) {
        const double p = row[next];
        if (!std::isfinite(p)) {
          v.push_back("non-finite probability at (s=" + std::to_string(s) + ",a=" +
                      std::to_string(a) + ",s'=" + std::to_string(next) + ")");
        } else if (p < 0.0) {
          v.push_back("negative probability " + format_number(p) + " at (s=" + std::to_string(s) +
                      ",a=" + std::to_string(a) + ",s'=" + std::to_string(next) + ")");
        }
        sum += p;
      }
      if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
        v.push_back("row sum " + format_number(sum) + " at (s=" + std::to_string(s) +
                    ",a=" + std::to_string(a) + ")");
      }
      if (mdp.is_terminal(s) && row[s] != 1.0) {
        v.push_back("terminal state " + std::to_string(s) + " does not self-loop under action " +
                    std::to_string(a));
      }
    }
  }
  return result;
}

FiniteMdp make_checked_mdp(FiniteMdp mdp) {
  auto result = validate_mdp(mdp);
  if (!result.ok()) {
    std::string message = "invalid MDP:";
    for (const auto& violation : result.violations) message += "\n  " + violation;
    throw InvalidModel(message);
  }
  return mdp;
}

RewardTable::RewardTable(Matrix values) : values_(std::move(values)), bound_(max_abs(values_)) {
  if (!all_finite(values_)) throw InvalidModel("reward table has non-finite entries");
}

RewardTable::RewardTable(Matrix values, double bound) : values_(std::move(values)), bound_(bound) {
  if (!all_finite(values_)) throw InvalidModel("reward table has non-finite entries");
  if (!(max_abs(values_) <= bound_)) {
    throw InvalidModel("reward entry exceeds the declared bound " + format_number(bound_));
  }
}

TaskSet::TaskSet(const FiniteMdp& mdp, std::vector<RewardTable> rewards,
                 std::vector<std::string> labels)
    : rewards_(std::move(rewards)), labels_(std::move(labels)) {
  if (rewards_.size() != labels_.size()) {
    throw InvalidModel("task set needs exactly one label per reward table");
  }
  for (std::size_t i = 0; i < rewards_.size(); ++i) {
    const auto& r = rewards_[i];
    if (r.num_states() != mdp.num_states() || r.num_actions() != mdp.num_actions()) {
      throw InvalidModel("reward '" + labels_[i] + "' does not match the MDP shape");
    }
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
      if (!mdp.is_terminal(s)) continue;
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        if (r(s, a) != 0.0) {
          throw InvalidModel("reward '" + labels_[i] + "' is nonzero at terminal state " +
                             std::to_string(s));
        }
      }
    }
    if (std::count(labels_.begin(), labels_.end(), labels_[i]) != 1) {
      throw InvalidModel("duplicate task label '" + labels_[i] + "'");
    }
  }
}

std::size_t TaskSet::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::out_of_range("unknown task label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

FiniteMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions,
                     double discount, double sparsity) {
  if (num_states == 0 || num_actions == 0) {
    throw std::invalid_argument("random_mdp: need at least one state and one action");
  }
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("random_mdp: sparsity must lie in (0, 1]");
  }
  Rng rng(seed);
  std::vector<double> transition(num_states * num_actions * num_states, 0.0);
  for (std::size_t row = 0; row < num_states * num_actions; ++row) {
    double* p = transition.data() + row * num_states;
    bool any = false;
    for (std::size_t next = 0; next < num_states; ++next) {
      const bool keep = rng.uniform() < sparsity;
      // Draw the weight unconditionally so the stream does not depend on keep.
      const double weight = 1.0 - rng.uniform();
      if (keep) {
        p[next] = weight;
        any = true;
      }
    }
    if (!any) p[rng.index(num_states)] = 1.0;
    double sum = 0.0;
    for (std::size_t next = 0; next < num_states; ++next) sum += p[next];
    for (std::size_t next = 0; next < num_states; ++next) p[next] /= sum;
  }
  return FiniteMdp(num_states, num_actions, std::move(transition), discount);
}

RewardTable random_reward(std::uint64_t seed, const FiniteMdp& mdp, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("random_reward: bound must be positive");
  Rng rng(seed);
  Matrix values(mdp.num_states(), mdp.num_actions());
  for (double& x : values.data()) x = rng.uniform(-bound, bound);
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.is_terminal(s)) continue;
    for (double& x : values.row(s)) x = 0.0;
  }
  return RewardTable(std::move(values), bound);
}

}  // namespace softq
