#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "softq/mdp.hpp"
#include "softq/tables.hpp"

namespace softq {

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Action order is part of the state/action encoding.
enum class GridAction : ActionIndex { up = 0, down = 1, left = 2, right = 3, stay = 4 };
inline constexpr std::size_t kGridActions = 5;

struct GridSpec {
  std::size_t width = 1;
  std::size_t height = 1;
  Cell start{};
  std::set<Cell> obstacles;
  // Probability that the chosen action is replaced by a uniformly random
  // cardinal move.
  double slip_prob = 0.0;

  std::size_t num_states() const { return width * height; }
  bool contains(Cell c) const {
    return c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < height &&
           static_cast<std::size_t>(c.col) < width;
  }
  bool is_obstacle(Cell c) const { return obstacles.count(c) > 0; }
  // Row-major: state = row * width + col.
  StateIndex state_of(Cell c) const {
    return static_cast<StateIndex>(c.row) * width + static_cast<StateIndex>(c.col);
  }
  Cell cell_of(StateIndex s) const {
    return Cell{static_cast<int>(s / width), static_cast<int>(s % width)};
  }
  std::size_t default_horizon() const { return 4 * (width + height); }

  // Throws InvalidModel on empty grids, out-of-range cells, a start inside an
  // obstacle, or slip_prob outside [0, 0.5).
  void validate() const;
};

// Moves into walls or obstacles leave the agent in place.
FiniteMdp build_grid_mdp(const GridSpec& spec, double discount);

enum class LineAxis { column, row };
enum class RewardStyle { negative_distance, goal_indicator };

struct LineGoalTask {
  LineAxis axis = LineAxis::column;
  std::size_t target_index = 0;
  RewardStyle style = RewardStyle::negative_distance;
};

// Negative distance: -|coordinate - target| / (size - 1), 0 for size 1.
// Indicator: 1 on the target line, 0 elsewhere. Action-independent.
RewardTable line_reward(const GridSpec& spec, const LineGoalTask& task);

// Cell where a column task and a row task meet.
Cell line_intersection(const LineGoalTask& a, const LineGoalTask& b);

// -Manhattan(s, goal) / (width - 1 + height - 1), 0 for a 1x1 grid.
RewardTable goal_distance_reward(const GridSpec& spec, Cell goal);

// Free cells 4-adjacent to an obstacle.
std::set<Cell> hazard_cells(const GridSpec& spec);

// Goal-distance shaping minus penalty times the probability that (s,a) enters
// a hazard cell.
RewardTable obstacle_avoid_reward(const GridSpec& spec, double penalty, Cell goal);

struct Rollout {
  std::vector<StateIndex> states;    // horizon + 1 entries, starting at the start state
  std::vector<ActionIndex> actions;  // horizon entries
  double total_reward = 0.0;         // undiscounted, 0 without a reward table
  std::uint64_t rng_seed = 0;
};

// Exactly `horizon` transitions, actions drawn from the policy rows and
// successors from P, deterministic per seed.
Rollout rollout(const FiniteMdp& mdp, const StochasticPolicy& policy, StateIndex start,
                std::size_t horizon, std::uint64_t seed, const RewardTable* reward = nullptr);

bool visits(const Rollout& r, StateIndex s);
bool visits_any(const Rollout& r, const std::set<StateIndex>& states);

double euclidean_distance(Cell a, Cell b);

struct DistanceStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t n = 0;
};

// Euclidean distance of each rollout's final cell to the target, aggregated.
DistanceStats final_distance_metric(const GridSpec& spec, std::span<const Rollout> rollouts,
                                    Cell target);

DistanceStats summarize(std::span<const double> values);

}  // namespace softq
