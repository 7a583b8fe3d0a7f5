#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "softq/envs.hpp"
#include "softq/io.hpp"

namespace softq {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FileSource {
  std::string declared;          // as written in the config
  std::filesystem::path path;    // resolved against the config's directory
};

// One instance per seed; list-valued fields are choices drawn per seed.
struct RandomSource {
  std::vector<std::size_t> num_states;
  std::vector<std::size_t> num_actions;
  std::vector<double> discount;
  double sparsity = 1.0;
  double reward_bound = 1.0;
};

struct GridSource {
  GridSpec grid;
  double discount = 0.95;
};

using MdpSource = std::variant<FileSource, RandomSource, GridSource>;

struct GoalTaskDef {
  Cell goal;
};
struct AvoidTaskDef {
  Cell goal;
  double penalty = 1.0;
};
struct RandomTaskDef {
  double bound = 1.0;
};
struct CopyTaskDef {
  std::string source;
};

struct TaskDef {
  std::string label;
  std::variant<LineGoalTask, GoalTaskDef, AvoidTaskDef, RandomTaskDef, CopyTaskDef> kind;
};

// Subset members are task indices or labels, resolved against the task list.
using TaskRef = std::variant<std::size_t, std::string>;

struct BenchOptions {
  std::optional<std::size_t> horizon;
  std::optional<Cell> target;
};

struct ResidualDescentOptions {
  double step = 1.0;
  std::optional<std::size_t> max_iter;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  MdpSource mdp;
  std::vector<TaskDef> tasks;
  std::vector<std::vector<TaskRef>> subsets;
  double temperature = 1.0;
  double tol = 1e-10;
  double divergence_factor = 0.5;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  BenchOptions bench;
  ResidualDescentOptions residual_descent;
};

struct ConfigOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

// Unknown fields anywhere are rejected. Relative MDP file paths resolve
// against `base_dir`.
ExperimentConfig parse_config(const io::Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

// Canonical JSON of the effective config (after overrides), keys sorted.
// The output directory is not part of it, so reports written to different
// directories carry the same hash.
std::string canonical_config(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

bool wants_format(const ExperimentConfig& config, const std::string& format);

}  // namespace softq
