#pragma once

// Experiment harness: JSON configs, seeded execution of controllers against a
// shared target realization, CSV traces, JSON summaries, trace replay and the
// built-in scenario catalog.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plot/controller.hpp"
#include "plot/lqt.hpp"
#include "plot/quadrotor.hpp"
#include "plot/serialize.hpp"
#include "plot/target.hpp"

namespace plot {

struct PlantSpec {
  enum class Kind { kQuadrotor, kMatrices };
  Kind kind = Kind::kQuadrotor;
  QuadrotorParams quadrotor;
  LinearSystem matrices;  // used when kind == kMatrices
};

struct TargetSpec {
  /// circle | benchmark | spiral | uniform | schedule
  std::string kind = "circle";
  double Ts = 0.1;  // follows the plant sampling time for the quadrotor
  double theta = 0.06;
  double radius = 1.0;
  double height = 0.0;
  double scale_lo = 0.7;
  double scale_hi = 1.5;
  Eigen::Vector2d shift{-0.1, 0.1};
  /// Explicit schedule and initial target for kind == "schedule".
  TargetSchedule schedule;
  VectorXd r0;
};

struct ControllerSpec {
  enum class GammaRule { kFixed, kTuned, kPower };

  std::string label;
  ControllerKind kind = ControllerKind::kPlot;
  int W = 1;
  bool tune_W = false;
  GammaRule gamma_rule = GammaRule::kFixed;
  double gamma = 1.0;
  double c_gamma = 1.5;  // gamma = 1 - c T^-a for kPower
  double a = 0.25;
  double eps = 1e-4;
  double M = 10.0;
  ProjectionMode projection = ProjectionMode::kWeightedBox;
  LearnerInit init = LearnerInit::kIdentity;
};

struct ExperimentConfig {
  std::string scenario;
  std::string name = "experiment";
  int T = 100;  // steps
  std::uint64_t seed = 0;
  PlantSpec plant;
  TargetSpec target;
  std::vector<ControllerSpec> controllers;
  /// Initial plant state; empty selects the default ([0.6, 0, 0.4, 0...]
  /// for the quadrotor, zero otherwise).
  VectorXd x0;
  bool write_traces = true;

  /// Throws ConfigError on unresolvable settings.
  void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

LinearSystem build_plant(const PlantSpec& spec);

struct BuiltTarget {
  TargetSchedule schedule;
  std::vector<VectorXd> raw;  // r_0..r_T in target space
  ReferenceLift lift;
  double V_T = 0.0;
  double L_T = 0.0;
  double max_norm = 0.0;  // empirical D_r
};

/// Generates the seeded target realization and its lift into a plant with
/// n states.
BuiltTarget build_target(const ExperimentConfig& cfg, int n);

VectorXd initial_state(const ExperimentConfig& cfg, int n);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ControllerRun {
  ControllerSpec spec;
  int W = 0;  // resolved horizon
  double gamma = 1.0;  // resolved forgetting factor
  SimulationTrace trace;
  RegretReport report;
  std::vector<VectorXd> qhat;
  double pdl_regret = 0.0;
  double max_prediction_norm = 0.0;
  double max_design_norm = 0.0;
  /// eps + sup |z|^2 / (1 - gamma); infinite for gamma = 1.
  double design_bound = 0.0;
  /// prediction_regret(k) for k = 1..W (empty for Naive LQR).
  std::vector<double> prediction_regret;
};

struct ExperimentResult {
  ExperimentConfig cfg;
  LinearSystem sys;
  LqtSolution lqt;
  BuiltTarget target;
  SimulationTrace optimal;
  std::vector<ControllerRun> runs;
  std::vector<CheckResult> checks;
  double wall_clock_s = 0.0;

  bool ok() const;
  const ControllerRun& run(const std::string& label) const;
};

/// Runs every configured controller against one target realization in the
/// order: reveal (x_t, r_t), incur cost, apply u_t, evolve. Numerical errors
/// raised inside the loop are rethrown with the step index in the message.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Columns: t, x_*, u_*, r_*, stage_cost, cum_cost, regret. Inputs are left
/// empty on the terminal row.
void write_trace_csv(const std::filesystem::path& path, const SimulationTrace& trace,
                     const std::vector<double>& regret);

Json summary_json(const ExperimentResult& result);

/// Writes config.json, summary.json and one CSV per controller (plus
/// optimal.csv) into dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct ReplayReport {
  long rows = 0;
  double max_state_error = 0.0;
  double max_cost_error = 0.0;
  double max_regret_error = 0.0;
};

/// Re-simulates a trace from its logged inputs and checks states, costs and
/// regret against the plant and targets regenerated from `cfg` (defaults to
/// config.json next to the trace). Throws ReplayMismatch with the first
/// offending row, or RealizationMismatch if the targets or x0 differ.
ReplayReport replay_trace(const std::filesystem::path& trace,
                          std::optional<ExperimentConfig> cfg = std::nullopt,
                          double tol = 1e-9);

std::vector<std::string> list_scenarios();
std::string scenario_description(const std::string& name);

/// The experiments making up a named scenario; throws ConfigError for
/// unknown names.
std::vector<ExperimentConfig> make_scenario(const std::string& name, std::uint64_t seed);

/// Runs a scenario; when out is set, each experiment is written to
/// out/<experiment name>/ and a regrets.csv table is written to out.
std::vector<ExperimentResult> run_scenario(const std::string& name, std::uint64_t seed,
                                           const std::optional<std::filesystem::path>& out);

}  // namespace plot
