#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softq/mdp.hpp"
#include "softq/random.hpp"

namespace softq::testutil {

inline FiniteMdp single_state_mdp(std::size_t num_actions, double discount) {
  return FiniteMdp(1, num_actions, std::vector<double>(num_actions, 1.0), discount);
}

inline RewardTable reward_rows(const std::vector<std::vector<double>>& rows) {
  return RewardTable(Matrix::from_rows(rows));
}

// Seeded instance with random size from the given caps.
struct SeededInstance {
  FiniteMdp mdp;
  TaskSet tasks;
};

inline SeededInstance seeded_instance(std::uint64_t seed, std::size_t num_states,
                                      std::size_t num_actions, double discount,
                                      std::size_t num_tasks = 2, double sparsity = 1.0) {
  FiniteMdp mdp = random_mdp(mix_seed(seed, 1), num_states, num_actions, discount, sparsity);
  std::vector<RewardTable> rewards;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < num_tasks; ++i) {
    rewards.push_back(random_reward(mix_seed(seed, 2 + i), mdp, 1.0));
    labels.push_back("task" + std::to_string(i));
  }
  TaskSet tasks(mdp, std::move(rewards), std::move(labels));
  return {std::move(mdp), std::move(tasks)};
}

}  // namespace softq::testutil
