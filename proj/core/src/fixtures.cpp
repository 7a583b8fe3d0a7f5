#include "softq/fixtures.hpp"

namespace softq {

TaskSet LineFixture::tasks(const FiniteMdp& mdp) const {
  return TaskSet(mdp, {line_reward(grid, first), line_reward(grid, second)}, {"column", "row"});
}

TaskSet ObstacleFixture::tasks(const FiniteMdp& mdp) const {
  return TaskSet(mdp, {goal_distance_reward(grid, goal), obstacle_avoid_reward(grid, penalty, goal)},
                 {"goal", "avoid"});
}

LineFixture line_composition_fixture() {
  LineFixture f{};
  f.grid.width = 9;
  f.grid.height = 9;
  f.grid.start = {0, 8};
  f.discount = 0.95;
  f.temperature = 0.01;
  f.first = {LineAxis::column, 2, RewardStyle::negative_distance};
  f.second = {LineAxis::row, 6, RewardStyle::negative_distance};
  f.horizon = f.grid.default_horizon();
  return f;
}

LineFixture hard_max_disagreement_fixture() {
  LineFixture f{};
  f.grid.width = 9;
  f.grid.height = 9;
  f.grid.start = {0, 6};
  f.grid.obstacles = {{2, 5}, {3, 6}, {5, 4}};
  f.discount = 0.95;
  f.temperature = 0.01;
  f.first = {LineAxis::column, 3, RewardStyle::negative_distance};
  f.second = {LineAxis::row, 6, RewardStyle::negative_distance};
  f.horizon = f.grid.default_horizon();
  return f;
}

ObstacleFixture obstacle_fixture() {
  ObstacleFixture f{};
  f.grid.width = 9;
  f.grid.height = 9;
  f.grid.start = {2, 0};
  f.grid.obstacles = {{4, 3}, {4, 4}, {4, 5}};
  f.discount = 0.95;
  f.temperature = 0.01;
  f.goal = {6, 8};
  f.penalty = 2.0;
  f.horizon = f.grid.default_horizon();
  return f;
}

}  // namespace softq
