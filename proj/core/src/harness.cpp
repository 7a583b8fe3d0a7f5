#include "softq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "softq/composition.hpp"
#include "softq/io.hpp"
#include "softq/oracle.hpp"
#include "softq/random.hpp"
#include "softq/soft_solver.hpp"
#include "softq/version.hpp"

namespace softq {

namespace {

namespace fs = std::filesystem;

void log_line(const RunOptions& run, const std::string& line) {
  if (run.log) *run.log << line << '\n';
}

template <typename T>
T pick(const std::vector<T>& choices, Rng& rng) {
  return choices[rng.index(choices.size())];
}

RewardTable reward_for(const TaskDef& def, std::size_t index, std::uint64_t seed,
                       const FiniteMdp& mdp, const std::optional<GridSpec>& grid,
                       const std::vector<RewardTable>& earlier,
                       const std::vector<std::string>& earlier_labels) {
  return std::visit(
      [&](const auto& kind) -> RewardTable {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, LineGoalTask>) {
          return line_reward(*grid, kind);
        } else if constexpr (std::is_same_v<K, GoalTaskDef>) {
          return goal_distance_reward(*grid, kind.goal);
        } else if constexpr (std::is_same_v<K, AvoidTaskDef>) {
          return obstacle_avoid_reward(*grid, kind.penalty, kind.goal);
        } else if constexpr (std::is_same_v<K, RandomTaskDef>) {
          return random_reward(mix_seed(seed, 2 + index), mdp, kind.bound);
        } else {
          const auto it = std::find(earlier_labels.begin(), earlier_labels.end(), kind.source);
          if (it == earlier_labels.end()) {
            throw ConfigError("config: task '" + def.label + "' copies unknown or later task '" +
                              kind.source + "'");
          }
          return earlier[static_cast<std::size_t>(it - earlier_labels.begin())];
        }
      },
      def.kind);
}

// Everything needed to score a rollout against a target.
struct Target {
  std::optional<LineGoalTask> line;
  Cell cell{};

  double distance(const GridSpec& grid, StateIndex s) const {
    const Cell c = grid.cell_of(s);
    if (line) {
      const int coordinate = line->axis == LineAxis::column ? c.col : c.row;
      return std::abs(coordinate - static_cast<int>(line->target_index));
    }
    return euclidean_distance(c, cell);
  }
  bool reached(const GridSpec& grid, const Rollout& r) const {
    return std::any_of(r.states.begin(), r.states.end(),
                       [&](StateIndex s) { return distance(grid, s) == 0.0; });
  }
};

Target own_target(const Instance& inst, std::size_t task) {
  const auto& def = inst.task_defs[task];
  if (def) {
    if (const auto* line = std::get_if<LineGoalTask>(&def->kind)) return Target{*line, {}};
    if (const auto* goal = std::get_if<GoalTaskDef>(&def->kind)) return Target{std::nullopt, goal->goal};
    if (const auto* avoid = std::get_if<AvoidTaskDef>(&def->kind)) {
      return Target{std::nullopt, avoid->goal};
    }
  }
  throw ConfigError("bench: task '" + inst.tasks.label(task) + "' has no grid target");
}

Target compound_target(const ExperimentConfig& config, const Instance& inst,
                       const std::vector<std::size_t>& subset) {
  if (config.bench.target) return Target{std::nullopt, *config.bench.target};
  std::optional<LineGoalTask> column;
  std::optional<LineGoalTask> row;
  for (std::size_t i : subset) {
    const Target t = own_target(inst, i);
    if (!t.line) return Target{std::nullopt, t.cell};
    (t.line->axis == LineAxis::column ? column : row) = t.line;
  }
  if (column && row) return Target{std::nullopt, line_intersection(*column, *row)};
  if (subset.size() == 1) return own_target(inst, subset[0]);
  throw ConfigError("bench: cannot derive a target cell for subset " +
                    subset_name(inst.tasks, subset) + "; set bench.target");
}

std::set<StateIndex> hazard_states(const GridSpec& grid) {
  std::set<StateIndex> out;
  for (const Cell& c : hazard_cells(grid)) out.insert(grid.state_of(c));
  return out;
}

void write_outputs(const fs::path& dir, const std::string& stem, const io::Json& json,
                   const std::string* csv, const ExperimentConfig& config) {
  if (wants_format(config, "json")) io::write_json_file(dir / (stem + ".json"), json);
  if (csv && wants_format(config, "csv")) io::write_text_file(dir / (stem + ".csv"), *csv);
}

}  // namespace

std::string tool_version() { return std::string(kVersion); }

Provenance provenance_of(const ExperimentConfig& config) {
  return Provenance{config_hash(config), config.seeds, tool_version()};
}

Instance build_instance(const ExperimentConfig& config, std::uint64_t seed) {
  std::optional<GridSpec> grid;
  std::vector<RewardTable> rewards;
  std::vector<std::string> labels;
  std::vector<std::optional<TaskDef>> defs;

  std::optional<FiniteMdp> mdp;
  std::string id = "fixed";
  if (const auto* file = std::get_if<FileSource>(&config.mdp)) {
    io::MdpDocument doc = [&] {
      try {
        return io::read_mdp_file(file->path);
      } catch (const io::FormatError& e) {
        throw ConfigError(std::string("mdp file: ") + e.what());
      }
    }();
    const ValidationResult check = validate_mdp(doc.mdp);
    if (!check) throw ConfigError("mdp file: " + check.violations.front());
    mdp = std::move(doc.mdp);
    for (std::size_t i = 0; i < doc.tasks.size(); ++i) {
      rewards.push_back(doc.tasks.reward(i));
      labels.push_back(doc.tasks.label(i));
      defs.emplace_back(std::nullopt);
    }
  } else if (const auto* random = std::get_if<RandomSource>(&config.mdp)) {
    Rng rng(mix_seed(seed, 0));
    const std::size_t num_states = pick(random->num_states, rng);
    const std::size_t num_actions = pick(random->num_actions, rng);
    const double discount = pick(random->discount, rng);
    mdp = random_mdp(mix_seed(seed, 1), num_states, num_actions, discount, random->sparsity);
    id = "seed_" + std::to_string(seed);
  } else {
    const auto& g = std::get<GridSource>(config.mdp);
    grid = g.grid;
    mdp = build_grid_mdp(g.grid, g.discount);
  }

  std::vector<TaskDef> task_defs = config.tasks;
  if (task_defs.empty() && std::holds_alternative<RandomSource>(config.mdp)) {
    const double bound = std::get<RandomSource>(config.mdp).reward_bound;
    task_defs = {TaskDef{"task0", RandomTaskDef{bound}}, TaskDef{"task1", RandomTaskDef{bound}}};
  }
  for (std::size_t i = 0; i < task_defs.size(); ++i) {
    const TaskDef& def = task_defs[i];
    if (std::find(labels.begin(), labels.end(), def.label) != labels.end()) {
      throw ConfigError("config: task label '" + def.label + "' already used by the MDP file");
    }
    try {
      rewards.push_back(reward_for(def, i, seed, *mdp, grid, rewards, labels));
    } catch (const InvalidModel& e) {
      throw ConfigError("config: task '" + def.label + "': " + e.what());
    }
    labels.push_back(def.label);
    defs.emplace_back(def);
  }
  if (rewards.empty()) throw ConfigError("config: no tasks defined");
  TaskSet tasks(*mdp, std::move(rewards), std::move(labels));
  return Instance{std::move(id), seed, std::move(*mdp), std::move(tasks), std::move(grid),
                  std::move(defs)};
}

std::vector<Instance> build_instances(const ExperimentConfig& config) {
  std::vector<Instance> out;
  if (std::holds_alternative<RandomSource>(config.mdp)) {
    for (std::uint64_t seed : config.seeds) out.push_back(build_instance(config, seed));
  } else {
    out.push_back(build_instance(config, config.seeds.front()));
  }
  return out;
}

std::vector<std::vector<std::size_t>> resolve_subsets(const ExperimentConfig& config,
                                                      const TaskSet& tasks) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& refs : config.subsets) {
    std::vector<std::size_t> subset;
    for (const auto& ref : refs) {
      if (const auto* index = std::get_if<std::size_t>(&ref)) {
        if (*index >= tasks.size()) {
          throw ConfigError("config: subset index " + std::to_string(*index) + " out of range");
        }
        subset.push_back(*index);
      } else {
        const auto& label = std::get<std::string>(ref);
        try {
          subset.push_back(tasks.index_of(label));
        } catch (const std::out_of_range&) {
          throw ConfigError("config: subset refers to unknown task '" + label + "'");
        }
      }
    }
    out.push_back(std::move(subset));
  }
  return out;
}

std::string subset_name(const TaskSet& tasks, const std::vector<std::size_t>& subset) {
  std::string name;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) name += "+";
    name += tasks.label(subset[i]);
  }
  return name;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t count = std::min(jobs, n);
    workers.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
    for (auto& t : workers) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------- certify

std::vector<CertificateRecord> run_certify(
    const ExperimentConfig& config, const RunOptions& run,
    const std::function<void(const Instance&, const std::string&, const BoundCertificate&)>&
        on_certificate) {
  if (config.temperature != 1.0) {
    throw ConfigError("certify: temperature must be 1 (bounds are proven for that case only)");
  }
  if (config.subsets.empty()) throw ConfigError("certify: no subsets configured");
  for (const auto& s : config.subsets) {
    if (s.size() != 2) {
      throw ConfigError("certify: pairwise only; got a subset of " + std::to_string(s.size()) +
                        " tasks");
    }
  }
  // Instances are built inside the workers so memory stays per-unit.
  const std::size_t num_instances =
      std::holds_alternative<RandomSource>(config.mdp) ? config.seeds.size() : 1;
  std::vector<std::vector<CertificateRecord>> per_instance(num_instances);
  std::mutex callback_mutex;
  parallel_for(num_instances, run.jobs, [&](std::size_t k) {
    const Instance inst = build_instance(config, config.seeds[k]);
    const auto subsets = resolve_subsets(config, inst.tasks);
    for (const auto& subset : subsets) {
      CertifyOptions options;
      options.temperature = config.temperature;
      options.tol = config.tol;
      options.divergence_factor = config.divergence_factor;
      const BoundCertificate cert = certify(inst.mdp, inst.tasks, subset, options);

      const double alternate = config.divergence_factor == kProofDivergenceFactor
                                   ? kStatedDivergenceFactor
                                   : kProofDivergenceFactor;
      const auto p1 = solve_soft_q(inst.mdp, inst.tasks.reward(subset[0]), 1.0, config.tol).policy;
      const auto p2 = solve_soft_q(inst.mdp, inst.tasks.reward(subset[1]), 1.0, config.tol).policy;
      const Matrix c_alt = compute_c_star(inst.mdp, p1, p2, alternate, config.tol);

      CertificateRecord record;
      record.instance = inst.id;
      record.seed = inst.seed;
      record.subset = subset_name(inst.tasks, subset);
      record.divergence_factor = config.divergence_factor;
      record.summary = cert.summary();
      record.alternate_factor = alternate;
      record.alternate_max_c_star = max_entry(c_alt);
      per_instance[k].push_back(record);
      if (on_certificate) {
        std::lock_guard<std::mutex> lock(callback_mutex);
        on_certificate(inst, record.subset, cert);
      }
    }
  });
  std::vector<CertificateRecord> out;
  for (auto& records : per_instance) {
    for (auto& r : records) out.push_back(std::move(r));
  }
  std::size_t failed = 0;
  for (const auto& r : out) failed += r.summary.status == CertificateStatus::failed;
  log_line(run, "certify: " + std::to_string(out.size()) + " certificates, " +
                    std::to_string(failed) + " failed");
  return out;
}

int cmd_certify(const ExperimentConfig& config, const RunOptions& run) {
  const fs::path dir = config.output_dir / "certify";
  const auto records = run_certify(
      config, run, [&](const Instance& inst, const std::string& name, const BoundCertificate& cert) {
        io::Json j;
        j["instance"] = inst.id;
        j["seed"] = inst.seed;
        j["subset_labels"] = name;
        j["certificate"] = io::to_json(cert);
        io::write_json_file(dir / inst.id / (name + ".json"), j);
      });

  std::map<std::string, std::size_t> counts{{"valid", 0}, {"vacuous", 0}, {"failed", 0}};
  for (const auto& r : records) ++counts[std::string(to_string(r.summary.status))];

  io::Json summary;
  summary["provenance"] = to_json(provenance_of(config));
  summary["counts"] = {{"valid", counts["valid"]},
                       {"vacuous", counts["vacuous"]},
                       {"failed", counts["failed"]},
                       {"total", records.size()}};
  io::Json list = io::Json::array();
  for (const auto& r : records) list.push_back(to_json(r));
  summary["certificates"] = std::move(list);
  const std::string csv = certificates_csv(records);
  write_outputs(dir, "summary", summary, &csv, config);

  if (run.log) {
    *run.log << "valid " << counts["valid"] << ", vacuous " << counts["vacuous"] << ", failed "
             << counts["failed"] << " of " << records.size() << '\n';
  }
  return counts["failed"] > 0 ? kExitViolation : kExitOk;
}

// ---------------------------------------------------------------- solve / compose

int cmd_solve(const ExperimentConfig& config, const RunOptions& run) {
  const fs::path dir = config.output_dir / "solve";
  const auto instances = build_instances(config);
  for (const Instance& inst : instances) {
    for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
      const SoftSolution sol =
          solve_soft_q(inst.mdp, inst.tasks.reward(i), config.temperature, config.tol);
      io::Json j;
      j["instance"] = inst.id;
      j["seed"] = inst.seed;
      j["task"] = inst.tasks.label(i);
      j["temperature"] = config.temperature;
      j["q"] = io::to_json(sol.q.values());
      j["v"] = io::to_json(sol.v);
      j["policy"] = io::to_json(sol.policy);
      j["diagnostics"] = io::to_json(sol.diagnostics);
      io::write_json_file(dir / inst.id / (inst.tasks.label(i) + ".json"), j);
      log_line(run, "solve " + inst.id + "/" + inst.tasks.label(i) + ": " +
                        std::to_string(sol.diagnostics.iterations) + " iterations");
    }
  }
  return kExitOk;
}

int cmd_compose(const ExperimentConfig& config, const RunOptions& run) {
  const fs::path dir = config.output_dir / "compose";
  if (config.subsets.empty()) throw ConfigError("compose: no subsets configured");
  for (const Instance& inst : build_instances(config)) {
    for (const auto& subset : resolve_subsets(config, inst.tasks)) {
      std::vector<ConstituentSolution> solutions;
      for (std::size_t i : subset) {
        SoftSolution sol = solve_soft_q(inst.mdp, inst.tasks.reward(i), config.temperature, config.tol);
        solutions.push_back({std::move(sol.q), std::move(sol.policy)});
      }
      const ComposedTask composed = compose(inst.mdp, inst.tasks, subset, solutions);
      const std::string name = subset_name(inst.tasks, subset);
      io::Json j;
      j["instance"] = inst.id;
      j["seed"] = inst.seed;
      j["subset"] = subset;
      j["subset_labels"] = name;
      j["temperature"] = config.temperature;
      j["compound_reward"] = io::to_json(composed.compound_reward.values());
      j["q_sigma"] = io::to_json(composed.q_sigma.values());
      j["pi_sigma"] = io::to_json(composed.pi_sigma);
      io::write_json_file(dir / inst.id / (name + ".json"), j);
      log_line(run, "compose " + inst.id + "/" + name);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

ExperimentReport run_bench(const ExperimentConfig& config, const RunOptions& run,
                           std::vector<RolloutRecord>* rollouts) {
  if (!std::holds_alternative<GridSource>(config.mdp)) {
    throw ConfigError("bench: needs a grid MDP source");
  }
  const Instance inst = build_instance(config, config.seeds.front());
  const GridSpec& grid = *inst.grid;
  const std::size_t horizon = config.bench.horizon.value_or(grid.default_horizon());
  const StateIndex start = grid.state_of(grid.start);
  const std::set<StateIndex> hazards = hazard_states(grid);
  const double alpha = config.temperature;
  const std::size_t n = config.seeds.size();

  ExperimentReport report;
  report.provenance = provenance_of(config);

  auto evaluate = [&](const std::string& task, const std::string& method,
                      const StochasticPolicy& policy, const RewardTable& reward,
                      const Target& target, std::size_t sweeps) {
    std::vector<double> distance, reached, hit;
    for (std::uint64_t seed : config.seeds) {
      const Rollout r = rollout(inst.mdp, policy, start, horizon, seed, &reward);
      RolloutRecord rec{task, method, seed, target.distance(grid, r.states.back()),
                        target.reached(grid, r), visits_any(r, hazards)};
      distance.push_back(rec.final_distance);
      reached.push_back(rec.reached_goal ? 1.0 : 0.0);
      hit.push_back(rec.hit_obstacle ? 1.0 : 0.0);
      if (rollouts) rollouts->push_back(std::move(rec));
    }
    auto add = [&](const char* metric, const DistanceStats& s) {
      report.rows.push_back(ReportRow{task, method, metric, s.mean, s.std, s.n});
    };
    add(kFinalDistance, summarize(distance));
    add(kReachedGoal, summarize(reached));
    add(kHitObstacle, summarize(hit));
    report.rows.push_back(
        ReportRow{task, method, kAdditionalSweeps, static_cast<double>(sweeps), 0.0, n});
  };

  std::vector<SoftSolution> soft;
  std::vector<HardSolution> hard;
  for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
    soft.push_back(solve_soft_q(inst.mdp, inst.tasks.reward(i), alpha, config.tol));
    hard.push_back(hard_max_solve(inst.mdp, inst.tasks.reward(i), config.tol));
  }

  for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
    const std::string& label = inst.tasks.label(i);
    const Target target = own_target(inst, i);
    evaluate(label, kSoftDirect, soft[i].policy, inst.tasks.reward(i), target,
             soft[i].diagnostics.iterations);
    evaluate(label, kHardDirect, hard[i].policy, inst.tasks.reward(i), target,
             hard[i].diagnostics.iterations);
  }

  for (const auto& subset : resolve_subsets(config, inst.tasks)) {
    const std::string name = subset_name(inst.tasks, subset);
    const Target target = compound_target(config, inst, subset);
    const RewardTable reward = compound_reward(inst.tasks, subset);

    const SoftSolution direct = solve_soft_q(inst.mdp, reward, alpha, config.tol);
    std::vector<ConstituentSolution> parts;
    std::vector<Matrix> hard_parts;
    for (std::size_t i : subset) {
      parts.push_back({soft[i].q, soft[i].policy});
      hard_parts.push_back(hard[i].q);
    }
    const ComposedTask merged = compose(inst.mdp, inst.tasks, subset, parts);
    const HardSolution hard_direct = hard_max_solve(inst.mdp, reward, config.tol);
    Matrix hard_mean(inst.mdp.num_states(), inst.mdp.num_actions(), 0.0);
    for (const Matrix& q : hard_parts) {
      for (std::size_t k = 0; k < q.data().size(); ++k) hard_mean.data()[k] += q.data()[k];
    }
    for (double& x : hard_mean.data()) x /= static_cast<double>(hard_parts.size());

    evaluate(name, kSoftDirect, direct.policy, reward, target, direct.diagnostics.iterations);
    evaluate(name, kSoftMerged, merged.pi_sigma, reward, target, 0);
    evaluate(name, kHardDirect, hard_direct.policy, reward, target,
             hard_direct.diagnostics.iterations);
    evaluate(name, kHardMerged, greedy_policy(hard_mean), reward, target, 0);

    if (alpha == 1.0 && subset.size() == 2) {
      CertifyOptions options;
      options.tol = config.tol;
      options.divergence_factor = config.divergence_factor;
      const BoundCertificate cert = certify(inst.mdp, inst.tasks, subset, options);
      CertificateRecord record;
      record.instance = inst.id;
      record.seed = inst.seed;
      record.subset = name;
      record.divergence_factor = config.divergence_factor;
      record.summary = cert.summary();
      record.alternate_factor = config.divergence_factor == kProofDivergenceFactor
                                    ? kStatedDivergenceFactor
                                    : kProofDivergenceFactor;
      record.alternate_max_c_star = max_entry(compute_c_star(
          inst.mdp, soft[subset[0]].policy, soft[subset[1]].policy, record.alternate_factor,
          config.tol));
      report.certificates.push_back(record);
    }
    log_line(run, "bench " + name + ": done");
  }
  return report;
}

int cmd_bench(const ExperimentConfig& config, const RunOptions& run) {
  std::vector<RolloutRecord> rollouts;
  const ExperimentReport report = run_bench(config, run, &rollouts);
  const fs::path dir = config.output_dir / "bench";
  const std::string csv = report_csv(report);
  write_outputs(dir, "report", to_json(report), &csv, config);
  if (wants_format(config, "csv")) io::write_text_file(dir / "rollouts.csv", rollouts_csv(rollouts));
  if (run.log) {
    for (const auto& row : report.rows) {
      if (row.metric != std::string(kFinalDistance)) continue;
      *run.log << row.task << " " << row.method << " final_distance " << format_number(row.mean)
               << " +- " << format_number(row.std) << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- plotdata

std::vector<TraceRecord> run_plotdata(const ExperimentConfig& config, const RunOptions& run) {
  const Instance inst = build_instance(config, config.seeds.front());
  std::vector<TraceRecord> out;
  auto emit = [&](const std::string& task, const char* method, const SolveDiagnostics& d) {
    for (std::size_t k = 0; k < d.contraction_trace.size(); ++k) {
      out.push_back(TraceRecord{task, method, k + 1, d.contraction_trace[k]});
    }
  };
  auto trace_task = [&](const std::string& task, const RewardTable& reward) {
    emit(task, kSoftDirect, solve_soft_q(inst.mdp, reward, config.temperature, config.tol).diagnostics);
    try {
      emit(task, kResidualDescent,
           residual_descent_solve(inst.mdp, reward, config.temperature, config.residual_descent.step,
                                  config.tol, config.residual_descent.max_iter)
               .diagnostics);
    } catch (const SolveFailure& e) {
      log_line(run, "plotdata " + task + ": " + e.what());
      emit(task, kResidualDescent, e.diagnostics());
    }
  };
  for (std::size_t i = 0; i < inst.tasks.size(); ++i) trace_task(inst.tasks.label(i), inst.tasks.reward(i));
  // Merged methods contribute no rows: composition performs no iterations.
  for (const auto& subset : resolve_subsets(config, inst.tasks)) {
    trace_task(subset_name(inst.tasks, subset), compound_reward(inst.tasks, subset));
  }
  return out;
}

int cmd_plotdata(const ExperimentConfig& config, const RunOptions& run) {
  const auto traces = run_plotdata(config, run);
  const fs::path dir = config.output_dir / "plotdata";
  std::map<std::string, std::map<std::string, std::size_t>> lengths;
  for (const auto& t : traces) ++lengths[t.task][t.method];
  const Instance inst = build_instance(config, config.seeds.front());
  for (const auto& subset : resolve_subsets(config, inst.tasks)) {
    lengths[subset_name(inst.tasks, subset)][kSoftMerged] = 0;
  }
  io::Json j;
  j["provenance"] = to_json(provenance_of(config));
  io::Json summary = io::Json::object();
  for (const auto& [task, methods] : lengths) {
    for (const auto& [method, count] : methods) summary[task][method] = count;
  }
  j["trace_lengths"] = std::move(summary);
  const std::string csv = traces_csv(traces);
  write_outputs(dir, "traces", j, &csv, config);
  log_line(run, "plotdata: " + std::to_string(traces.size()) + " trace rows");
  return kExitOk;
}

// ---------------------------------------------------------------- verify

std::vector<VerifyCheck> run_verify(const ExperimentConfig& config, const RunOptions& run) {
  const std::size_t num_instances =
      std::holds_alternative<RandomSource>(config.mdp) ? config.seeds.size() : 1;
  std::vector<std::vector<VerifyCheck>> per_instance(num_instances);
  const double tol = config.tol;
  const double alpha = config.temperature;
  parallel_for(num_instances, run.jobs, [&](std::size_t k) {
    const Instance inst = build_instance(config, config.seeds[k]);
    auto& checks = per_instance[k];
    auto record = [&](const std::string& check, const std::string& task, double diff,
                      double threshold) {
      checks.push_back(VerifyCheck{inst.id, check, task, diff, threshold,
                                   diff <= threshold ? "pass" : "fail"});
    };
    auto skip = [&](const std::string& check, const std::string& task) {
      checks.push_back(VerifyCheck{inst.id, check, task, 0.0, 0.0, "skipped"});
    };
    const std::size_t unknowns = inst.mdp.num_states() * inst.mdp.num_actions();
    for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
      const std::string& label = inst.tasks.label(i);
      const RewardTable& reward = inst.tasks.reward(i);
      const SoftSolution sol = solve_soft_q(inst.mdp, reward, alpha, tol);
      const double bound =
          reward.bound() + alpha * std::log(static_cast<double>(inst.mdp.num_actions()));
      const auto horizon = oracle::HorizonConfig::for_tolerance(inst.mdp.discount(), bound, tol);
      const auto reference = oracle::finite_horizon_soft_q(inst.mdp, reward, alpha, horizon.horizon);
      if (reference) {
        record("solve_vs_finite_horizon", label, max_abs_diff(sol.q.values(), reference->values()),
               2.0 * tol);
      } else {
        skip("solve_vs_finite_horizon", label);
      }
      if (unknowns <= oracle::kMaxDenseUnknowns) {
        const auto uniform =
            StochasticPolicy::uniform(inst.mdp.num_states(), inst.mdp.num_actions());
        record("policy_eval_vs_linear_solve", label,
               max_abs_diff(soft_policy_evaluation(inst.mdp, reward, uniform, alpha, tol).values(),
                            oracle::linear_solve_policy_eval(inst.mdp, reward, uniform, alpha).values()),
               10.0 * tol);
      } else {
        skip("policy_eval_vs_linear_solve", label);
      }
    }
    for (const auto& subset : resolve_subsets(config, inst.tasks)) {
      const std::string name = subset_name(inst.tasks, subset);
      const bool tiny = inst.mdp.num_states() <= oracle::kTinyStates &&
                        inst.mdp.num_actions() <= oracle::kTinyActions;
      if (subset.size() != 2 || alpha != 1.0 || !tiny) {
        skip("certificate_vs_tiny_oracle", name);
        continue;
      }
      CertifyOptions options;
      options.tol = tol;
      options.divergence_factor = config.divergence_factor;
      const std::array<std::size_t, 2> pair{subset[0], subset[1]};
      const BoundCertificate production = certify(inst.mdp, inst.tasks, pair, options);
      const BoundCertificate reference = oracle::exhaustive_tiny_certificate(
          inst.mdp, inst.tasks, pair, tol, config.divergence_factor);
      record("certificate_vs_tiny_oracle", name, max_field_difference(production, reference), 1e-8);
    }
  });
  std::vector<VerifyCheck> out;
  for (auto& checks : per_instance) {
    for (auto& c : checks) out.push_back(std::move(c));
  }
  return out;
}

int cmd_verify(const ExperimentConfig& config, const RunOptions& run) {
  const auto checks = run_verify(config, run);
  std::size_t failed = 0;
  std::size_t passed = 0;
  std::string csv = "instance,check,task,max_diff,threshold,status\n";
  io::Json list = io::Json::array();
  for (const auto& c : checks) {
    failed += c.status == "fail";
    passed += c.status == "pass";
    csv += c.instance + "," + c.check + "," + c.task + "," + format_number(c.max_diff) + "," +
           format_number(c.threshold) + "," + c.status + "\n";
    list.push_back({{"instance", c.instance},
                    {"check", c.check},
                    {"task", c.task},
                    {"max_diff", c.max_diff},
                    {"threshold", c.threshold},
                    {"status", c.status}});
  }
  io::Json j;
  j["provenance"] = to_json(provenance_of(config));
  j["passed"] = passed;
  j["failed"] = failed;
  j["checks"] = std::move(list);
  write_outputs(config.output_dir / "verify", "verify", j, &csv, config);
  log_line(run, "verify: " + std::to_string(passed) + " passed, " + std::to_string(failed) +
                    " failed, " + std::to_string(checks.size() - passed - failed) + " skipped");
  return failed > 0 ? kExitViolation : kExitOk;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const ExperimentConfig& config, const RunOptions& run) {
  const fs::path dir = config.output_dir / "gen";
  for (const Instance& inst : build_instances(config)) {
    const fs::path path = dir / ("mdp_" + inst.id + ".json");
    io::write_mdp_file(path, inst.mdp, inst.tasks);
    log_line(run, "gen: wrote " + path.string());
  }
  return kExitOk;
}

}  // namespace softq
