#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "softq/config.hpp"
#include "softq/envs.hpp"
#include "softq/mdp.hpp"
#include "softq/report.hpp"

namespace softq {

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2 };

// One concrete MDP with its tasks. Random sources give one instance per seed
// (id "seed_<n>"); file and grid sources give a single instance "fixed".
struct Instance {
  std::string id;
  std::uint64_t seed = 0;
  FiniteMdp mdp;
  TaskSet tasks;
  std::optional<GridSpec> grid;
  // Parallel to tasks; nullopt for rewards read from an MDP file.
  std::vector<std::optional<TaskDef>> task_defs;
};

std::vector<Instance> build_instances(const ExperimentConfig& config);
Instance build_instance(const ExperimentConfig& config, std::uint64_t seed);

std::vector<std::vector<std::size_t>> resolve_subsets(const ExperimentConfig& config,
                                                      const TaskSet& tasks);
std::string subset_name(const TaskSet& tasks, const std::vector<std::size_t>& subset);

struct RunOptions {
  std::size_t jobs = 1;
  std::ostream* log = nullptr;
};

// Runs fn(0..n-1) on up to `jobs` threads. Exceptions are rethrown in index
// order after all work finishes.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::string tool_version();
Provenance provenance_of(const ExperimentConfig& config);

// Pure computations behind the subcommands.
std::vector<CertificateRecord> run_certify(const ExperimentConfig& config, const RunOptions& run,
                                           const std::function<void(const Instance&,
                                                                    const std::string&,
                                                                    const BoundCertificate&)>&
                                               on_certificate = {});
ExperimentReport run_bench(const ExperimentConfig& config, const RunOptions& run,
                           std::vector<RolloutRecord>* rollouts = nullptr);
std::vector<TraceRecord> run_plotdata(const ExperimentConfig& config, const RunOptions& run);

struct VerifyCheck {
  std::string instance;
  std::string check;
  std::string task;
  double max_diff = 0.0;
  double threshold = 0.0;
  std::string status;  // pass, fail or skipped
};
std::vector<VerifyCheck> run_verify(const ExperimentConfig& config, const RunOptions& run);

// Subcommands: write artifacts under config.output_dir/<command>/ and return
// an exit code. Configuration problems surface as ConfigError or InvalidModel.
int cmd_solve(const ExperimentConfig& config, const RunOptions& run);
int cmd_compose(const ExperimentConfig& config, const RunOptions& run);
int cmd_certify(const ExperimentConfig& config, const RunOptions& run);
int cmd_bench(const ExperimentConfig& config, const RunOptions& run);
int cmd_plotdata(const ExperimentConfig& config, const RunOptions& run);
int cmd_verify(const ExperimentConfig& config, const RunOptions& run);
int cmd_gen(const ExperimentConfig& config, const RunOptions& run);

}  // namespace softq
