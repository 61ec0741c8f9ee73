// Command line front end for the PLOT simulator.
//
//   plot_sim run <config.json> [--out DIR]
//   plot_sim scenario <name> [--out DIR] [--seed N]
//   plot_sim replay <trace.csv> [--config FILE] [--seed N]
//   plot_sim list-scenarios

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "plot/errors.hpp"
#include "plot/harness.hpp"

namespace {

int report(const std::vector<plot::ExperimentResult>& results) {
  int failures = 0;
  for (const auto& res : results) {
    fmt::print("{} (T={}, seed={}, {:.2f}s)\n", res.cfg.name, res.cfg.T, res.cfg.seed,
               res.wall_clock_s);
    for (const auto& r : res.runs) {
      fmt::print("  {:<14} regret {:>14.6g}   cost {:>14.6g}\n", r.spec.label,
                 r.report.final_regret, r.trace.cumulative_costs.back());
    }
    for (const auto& c : res.checks) {
      if (!c.pass) {
        fmt::print("  FAILED {}: {}\n", c.name, c.detail);
        ++failures;
      }
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive linear online tracking simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario, trace_path, replay_config;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default: results/<name>)");

  auto* scen = app.add_subcommand("scenario", "Run a built-in scenario");
  scen->add_option("name", scenario, "Scenario name")->required();
  scen->add_option("--out", out_dir, "Output directory (default: results/<name>)");
  scen->add_option("--seed", seed, "Seed for random targets");

  auto* replay = app.add_subcommand("replay", "Verify a trace by re-simulation");
  replay->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  replay->add_option("--config", replay_config, "Config (default: config.json next to the trace)");
  auto* replay_seed = replay->add_option("--seed", seed, "Override the config seed");

  auto* list = app.add_subcommand("list-scenarios", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = plot::load_config(config_path);
      const auto res = plot::run_experiment(cfg);
      const std::filesystem::path out = out_dir.empty() ? "results/" + cfg.name : out_dir;
      plot::write_outputs(res, out);
      fmt::print("wrote {}\n", out.string());
      return report({res});
    }
    if (*scen) {
      const std::filesystem::path out = out_dir.empty() ? "results/" + scenario : out_dir;
      const auto results = plot::run_scenario(scenario, seed, out);
      fmt::print("wrote {}\n", out.string());
      return report(results);
    }
    if (*replay) {
      std::optional<plot::ExperimentConfig> cfg;
      if (!replay_config.empty()) cfg = plot::load_config(replay_config);
      if (*replay_seed) {
        if (!cfg) cfg = plot::load_config(std::filesystem::path(trace_path).parent_path() / "config.json");
        cfg->seed = seed;
      }
      const auto rep = plot::replay_trace(trace_path, cfg);
      fmt::print("ok: {} rows, max state error {:.3e}, max cost error {:.3e}\n", rep.rows,
                 rep.max_state_error, rep.max_cost_error);
      return 0;
    }
    if (*list) {
      for (const auto& name : plot::list_scenarios()) {
        fmt::print("{:<20} {}\n", name, plot::scenario_description(name));
      }
      return 0;
    }
  } catch (const plot::ReplayMismatch& e) {
    fmt::print(stderr, "replay mismatch (row {}): {}\n", e.row(), e.what());
    return 2;
  } catch (const plot::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
