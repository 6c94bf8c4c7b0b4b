// Command-line front end: run, suite, compare, validate.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bittide/experiment.hpp"

using namespace bittide;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool svg = false;
  std::optional<std::string> engine;
};

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.svg) cfg.svg = true;
  if (o.engine) {
    if (*o.engine == "model") {
      cfg.engine = EngineKind::model;
    } else if (*o.engine == "frames") {
      cfg.engine = EngineKind::frames;
    } else {
      throw ConfigError("--engine must be `model` or `frames`");
    }
  }
}

int report(const RunOutcome& outcome, const ExperimentConfig& cfg) {
  const auto& s = outcome.summary;
  std::cout << cfg.name << ": " << (s.fault ? "fault" : "ok") << ", final spread " << s.convergence.final_spread_ppm
            << " ppm, time to " << s.band_ppm << " ppm ";
  if (s.convergence.time_to_band) {
    std::cout << *s.convergence.time_to_band << " s";
  } else {
    std::cout << "never";
  }
  std::cout << ", wall " << s.wall_seconds << " s -> " << cfg.output_dir.string() << '\n';
  if (s.fault) {
    std::cerr << "simulation fault (" << to_string(s.fault->kind) << ") at " << s.fault->time_s
              << " s: " << s.fault->message << '\n';
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bittide network simulator"};
  app.require_subcommand(1);

  Overrides overrides;
  const auto add_overrides = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--seed", overrides.seed, "RNG seed");
    if (with_out) cmd->add_option("--out", overrides.out, "output directory");
    cmd->add_flag("--svg", overrides.svg, "also write freq.svg and buffers.svg");
    cmd->add_option("--engine", overrides.engine, "model or frames");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path, "config file")->required();
  add_overrides(run, true);

  std::vector<std::string> suite_list;
  std::string scale_name = "desk";
  bool print_config = false;
  auto* suite = app.add_subcommand("suite", "run bundled experiments");
  suite->add_option("names", suite_list, "suite names or `all`")->required();
  suite->add_option("--scale", scale_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  suite->add_flag("--print-config", print_config, "print the bundled config and exit");
  add_overrides(suite, true);

  std::string dir_a, dir_b, column_a = "freq_offset_ppm", column_b = "freq_offset_ppm";
  auto* compare = app.add_subcommand("compare", "compare the frequency traces of two runs");
  compare->add_option("dir_a", dir_a)->required();
  compare->add_option("dir_b", dir_b)->required();
  compare->add_option("--column-a", column_a, "freq_offset_ppm or c_est_ppm");
  compare->add_option("--column-b", column_b, "freq_offset_ppm or c_est_ppm");

  auto* validate_cmd = app.add_subcommand("validate", "parse and check a config");
  validate_cmd->add_option("config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = load_config(config_path);
      apply(overrides, cfg);
      return report(run_experiment(cfg), cfg);
    }
    if (*suite) {
      const SuiteScale scale = scale_name == "full" ? SuiteScale::full : SuiteScale::desk;
      std::vector<std::string> names;
      for (const auto& n : suite_list) {
        if (n == "all") {
          for (const auto& s : suite_names()) names.push_back(s);
        } else {
          names.push_back(n);
        }
      }
      int worst = kExitOk;
      for (const auto& name : names) {
        if (print_config) {
          std::cout << suite_config_text(name, scale);
          continue;
        }
        ExperimentConfig cfg = suite_config(name, scale);
        apply(overrides, cfg);
        if (overrides.out && names.size() > 1) cfg.output_dir = std::filesystem::path(*overrides.out) / name;
        worst = std::max(worst, report(run_experiment(cfg), cfg));
      }
      return worst;
    }
    if (*compare) {
      const auto ca = parse_trace_column(column_a);
      const auto cb = parse_trace_column(column_b);
      if (!ca || !cb) throw ConfigError("unknown trace column");
      write_compare_report(std::cout, compare_runs(dir_a, dir_b, *ca, *cb));
      return kExitOk;
    }
    if (*validate_cmd) {
      const ExperimentConfig cfg = load_config(config_path);
      for (const auto& w : validate(cfg.sim.topology).warnings) std::cout << "warning: " << w << '\n';
      std::cout << cfg.name << ": ok (" << cfg.sim.topology.size() << " nodes, " << cfg.sim.topology.links().size()
                << " links)\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitUsage;
}
