#pragma once

#include <cstddef>

#include "softq/envs.hpp"

namespace softq {

// Two line tasks whose intersection is the compound goal.
struct LineFixture {
  GridSpec grid;
  double discount;
  double temperature;
  LineGoalTask first;
  LineGoalTask second;
  std::size_t horizon;

  Cell target() const { return line_intersection(first, second); }
  TaskSet tasks(const FiniteMdp& mdp) const;
};

struct ObstacleFixture {
  GridSpec grid;
  double discount;
  double temperature;
  Cell goal;
  double penalty;
  std::size_t horizon;

  // Task 0 "goal": goal-distance shaping; task 1 "avoid": shaping plus hazard
  // penalty.
  TaskSet tasks(const FiniteMdp& mdp) const;
};

// 9x9 open grid, no slip, column 2 and row 6, start at the top-right corner.
LineFixture line_composition_fixture();

// 9x9 grid with three obstacles where the two line tasks' greedy actions
// disagree at the start and the mean-Q greedy policy stalls against an
// obstacle.
LineFixture hard_max_disagreement_fixture();

// 9x9 grid with a three-cell wall between start and goal.
ObstacleFixture obstacle_fixture();

}  // namespace softq
