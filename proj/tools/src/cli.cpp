#include "softq_cli/cli.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softq/harness.hpp"
#include "softq/io.hpp"
#include "softq/tables.hpp"

namespace softq::cli {

namespace {

using Command = std::function<int(const ExperimentConfig&, const RunOptions&)>;

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> tol;
  std::size_t jobs = 1;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "experiment config (JSON)")->required();
  sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
  sub->add_option("--seed-override", flags.seed_override, "replace the seed list with one seed");
  sub->add_option("--tol", flags.tol, "fixed-point tolerance (overrides tol)");
  sub->add_option("--jobs", flags.jobs, "worker threads for independent instances")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft Q-iteration, additive composition and bound certification"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands{
      {"solve", {"solve every task; write Q*, V*, pi* and diagnostics", cmd_solve}},
      {"compose", {"compose the configured subsets", cmd_compose}},
      {"certify", {"certify pairwise composition bounds", cmd_certify}},
      {"bench", {"gridworld benchmark table and rollouts", cmd_bench}},
      {"plotdata", {"residual-vs-iteration traces", cmd_plotdata}},
      {"verify", {"cross-check solvers against the oracles", cmd_verify}},
      {"gen", {"write the configured MDP instances to files", cmd_gen}},
  };
  CommonFlags flags;
  std::map<CLI::App*, Command> handlers;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    add_common(sub, flags);
    handlers[sub] = entry.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    ExperimentConfig config = load_config(flags.config);
    ConfigOverrides overrides;
    if (flags.out) overrides.output_dir = *flags.out;
    overrides.seed = flags.seed_override;
    overrides.tol = flags.tol;
    apply_overrides(config, overrides);
    RunOptions run;
    run.jobs = flags.jobs;
    run.log = &out;
    return handlers.at(chosen)(config, run);
  } catch (const ConfigError& e) {
    err << "softq " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidModel& e) {
    err << "softq " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::FormatError& e) {
    err << "softq " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolveFailure& e) {
    err << "softq " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitViolation;
  } catch (const std::exception& e) {
    err << "softq " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace softq::cli
