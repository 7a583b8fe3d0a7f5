#include "softq/envs.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "softq/random.hpp"

namespace softq {

namespace {

constexpr std::array<Cell, kGridActions> kMoves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}}};

Cell step(const GridSpec& spec, Cell from, Cell move) {
  const Cell to{from.row + move.row, from.col + move.col};
  if (!spec.contains(to) || spec.is_obstacle(to)) return from;
  return to;
}

std::size_t sample(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

}  // namespace

void GridSpec::validate() const {
  if (width == 0 || height == 0) throw InvalidModel("grid must have positive width and height");
  if (!(slip_prob >= 0.0 && slip_prob < 0.5)) throw InvalidModel("slip_prob must be in [0, 0.5)");
  if (!contains(start)) throw InvalidModel("start cell outside the grid");
  for (const Cell& c : obstacles) {
    if (!contains(c)) throw InvalidModel("obstacle cell outside the grid");
  }
  if (is_obstacle(start)) throw InvalidModel("start cell is an obstacle");
}

FiniteMdp build_grid_mdp(const GridSpec& spec, double discount) {
  spec.validate();
  const std::size_t n = spec.num_states();
  std::vector<double> transition(n * kGridActions * n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    const Cell here = spec.cell_of(s);
    for (ActionIndex a = 0; a < kGridActions; ++a) {
      double* row = transition.data() + (s * kGridActions + a) * n;
      row[spec.state_of(step(spec, here, kMoves[a]))] += 1.0 - spec.slip_prob;
      if (spec.slip_prob > 0.0) {
        for (std::size_t m = 0; m < 4; ++m) {
          row[spec.state_of(step(spec, here, kMoves[m]))] += spec.slip_prob / 4.0;
        }
      }
    }
  }
  return make_checked_mdp(FiniteMdp(n, kGridActions, std::move(transition), discount));
}

RewardTable line_reward(const GridSpec& spec, const LineGoalTask& task) {
  const std::size_t size = task.axis == LineAxis::column ? spec.width : spec.height;
  if (task.target_index >= size) throw InvalidModel("line target outside the grid");
  Matrix r(spec.num_states(), kGridActions);
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    const Cell c = spec.cell_of(s);
    const int coordinate = task.axis == LineAxis::column ? c.col : c.row;
    const int offset = std::abs(coordinate - static_cast<int>(task.target_index));
    double value;
    if (task.style == RewardStyle::goal_indicator) {
      value = offset == 0 ? 1.0 : 0.0;
    } else {
      value = size > 1 ? -static_cast<double>(offset) / static_cast<double>(size - 1) : 0.0;
    }
    for (ActionIndex a = 0; a < kGridActions; ++a) r(s, a) = value + 0.0;
  }
  return RewardTable(std::move(r));
}

Cell line_intersection(const LineGoalTask& a, const LineGoalTask& b) {
  if (a.axis == b.axis) throw InvalidModel("line tasks on the same axis do not intersect in a cell");
  const LineGoalTask& column = a.axis == LineAxis::column ? a : b;
  const LineGoalTask& row = a.axis == LineAxis::row ? a : b;
  return Cell{static_cast<int>(row.target_index), static_cast<int>(column.target_index)};
}

RewardTable goal_distance_reward(const GridSpec& spec, Cell goal) {
  if (!spec.contains(goal)) throw InvalidModel("goal cell outside the grid");
  const double scale = static_cast<double>(spec.width - 1 + spec.height - 1);
  Matrix r(spec.num_states(), kGridActions);
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    const Cell c = spec.cell_of(s);
    const int manhattan = std::abs(c.row - goal.row) + std::abs(c.col - goal.col);
    const double value = scale > 0.0 ? -static_cast<double>(manhattan) / scale + 0.0 : 0.0;
    for (ActionIndex a = 0; a < kGridActions; ++a) r(s, a) = value;
  }
  return RewardTable(std::move(r));
}

std::set<Cell> hazard_cells(const GridSpec& spec) {
  std::set<Cell> out;
  for (const Cell& o : spec.obstacles) {
    for (std::size_t m = 0; m < 4; ++m) {
      const Cell n{o.row + kMoves[m].row, o.col + kMoves[m].col};
      if (spec.contains(n) && !spec.is_obstacle(n)) out.insert(n);
    }
  }
  return out;
}

RewardTable obstacle_avoid_reward(const GridSpec& spec, double penalty, Cell goal) {
  if (!(penalty > 0.0)) throw InvalidModel("penalty must be positive");
  const FiniteMdp mdp = build_grid_mdp(spec, 0.0);
  const std::set<Cell> hazards = hazard_cells(spec);
  std::vector<double> is_hazard(spec.num_states(), 0.0);
  for (const Cell& c : hazards) is_hazard[spec.state_of(c)] = 1.0;

  Matrix r = goal_distance_reward(spec, goal).values();
  for (StateIndex s = 0; s < spec.num_states(); ++s) {
    for (ActionIndex a = 0; a < kGridActions; ++a) {
      double entry = 0.0;
      const auto next = mdp.successors(s, a);
      for (StateIndex t = 0; t < next.size(); ++t) entry += next[t] * is_hazard[t];
      r(s, a) -= penalty * entry;
    }
  }
  return RewardTable(std::move(r));
}

Rollout rollout(const FiniteMdp& mdp, const StochasticPolicy& policy, StateIndex start,
                std::size_t horizon, std::uint64_t seed, const RewardTable* reward) {
  if (horizon < 1) throw InvalidModel("rollout horizon must be >= 1");
  if (start >= mdp.num_states()) throw InvalidModel("rollout start state out of range");
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions()) {
    throw InvalidModel("policy shape does not match the MDP");
  }
  Rng rng(seed);
  Rollout out;
  out.rng_seed = seed;
  out.states.reserve(horizon + 1);
  out.actions.reserve(horizon);
  StateIndex s = start;
  out.states.push_back(s);
  for (std::size_t t = 0; t < horizon; ++t) {
    const ActionIndex a = sample(policy.row(s), rng.uniform());
    if (reward) out.total_reward += (*reward)(s, a);
    s = sample(mdp.successors(s, a), rng.uniform());
    out.actions.push_back(a);
    out.states.push_back(s);
  }
  return out;
}

bool visits(const Rollout& r, StateIndex s) {
  for (StateIndex x : r.states) {
    if (x == s) return true;
  }
  return false;
}

bool visits_any(const Rollout& r, const std::set<StateIndex>& states) {
  for (StateIndex x : r.states) {
    if (states.count(x)) return true;
  }
  return false;
}

double euclidean_distance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

DistanceStats summarize(std::span<const double> values) {
  DistanceStats out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

DistanceStats final_distance_metric(const GridSpec& spec, std::span<const Rollout> rollouts,
                                    Cell target) {
  if (rollouts.empty()) throw InvalidModel("final_distance_metric needs at least one rollout");
  std::vector<double> distances;
  distances.reserve(rollouts.size());
  for (const Rollout& r : rollouts) {
    distances.push_back(euclidean_distance(spec.cell_of(r.states.back()), target));
  }
  return summarize(distances);
}

}  // namespace softq
