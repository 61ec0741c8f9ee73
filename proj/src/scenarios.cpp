#include <fstream>
#include <map>

#include <fmt/format.h>

#include "plot/errors.hpp"
#include "plot/harness.hpp"

namespace plot {

namespace fs = std::filesystem;

namespace {

ControllerSpec plot_spec(std::string label, int W, double gamma, double M) {
  ControllerSpec c;
  c.label = std::move(label);
  c.kind = ControllerKind::kPlot;
  c.W = W;
  c.gamma = gamma;
  c.M = M;
  return c;
}

ControllerSpec naive_lqr_spec() {
  ControllerSpec c;
  c.label = "naive_lqr";
  c.kind = ControllerKind::kNaiveLqr;
  return c;
}

ExperimentConfig base(const std::string& scenario, const std::string& name, int T,
                      std::uint64_t seed, const std::string& target) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.name = name;
  cfg.T = T;
  cfg.seed = seed;
  cfg.target.kind = target;
  cfg.target.Ts = cfg.plant.quadrotor.Ts;
  return cfg;
}

struct Entry {
  std::string description;
  std::vector<ExperimentConfig> (*build)(std::uint64_t seed);
};

std::vector<ExperimentConfig> circle_w_sweep(std::uint64_t seed) {
  auto cfg = base("circle_w_sweep", "circle", 2000, seed, "circle");
  for (int W : {1, 3, 5, 10, 15, 20, 25}) {
    cfg.controllers.push_back(plot_spec(fmt::format("plot_W{}", W), W, 0.8, 10.0));
  }
  cfg.controllers.push_back(naive_lqr_spec());
  return {cfg};
}

std::vector<ExperimentConfig> gamma_sweep(std::uint64_t seed) {
  std::vector<ExperimentConfig> out;
  for (int T : {1500, 2000, 2500, 3000}) {
    auto cfg = base("gamma_sweep", fmt::format("T{}", T), T, seed, "spiral");
    for (double a : {0.1, 0.25, 0.5, 1.0}) {
      ControllerSpec c = plot_spec(fmt::format("plot_a{:.2f}", a), 5, 1.0, 1.0);
      c.gamma_rule = ControllerSpec::GammaRule::kPower;
      c.c_gamma = 1.5;
      c.a = a;
      c.eps = 1.0;
      c.init = LearnerInit::kZero;
      cfg.controllers.push_back(c);
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

std::vector<ExperimentConfig> benchmark_dynamic(std::uint64_t seed) {
  auto cfg = base("benchmark_dynamic", "benchmark", 2000, seed, "benchmark");
  cfg.controllers = {plot_spec("plot", 6, 0.9, 10.0), naive_lqr_spec()};
  return {cfg};
}

std::vector<ExperimentConfig> uniform_random(std::uint64_t seed) {
  auto cfg = base("uniform_random", "uniform", 2000, seed, "uniform");
  cfg.controllers = {plot_spec("plot", 2, 0.02, 0.7), naive_lqr_spec()};
  return {cfg};
}

std::vector<ExperimentConfig> naive_rls_contrast(std::uint64_t seed) {
  auto cfg = base("naive_rls_contrast", "spiral", 2000, seed, "spiral");
  ControllerSpec naive = plot_spec("naive_rls", 10, 0.8, 1.0);
  naive.kind = ControllerKind::kNaiveRls;
  cfg.controllers = {plot_spec("plot", 10, 0.8, 1.0), naive};
  return {cfg};
}

const std::map<std::string, Entry>& catalog() {
  static const std::map<std::string, Entry> entries = {
      {"circle_w_sweep",
       {"static circle, PLOT with W in {1,3,5,10,15,20,25}, gamma 0.8, M 10, T 2000",
        circle_w_sweep}},
      {"gamma_sweep",
       {"sqrt(T) spiral, PLOT W 5, M 1, gamma = 1 - 1.5 T^-a for a in {0.1,0.25,0.5,1}, "
        "T in {1500,2000,2500,3000}",
        gamma_sweep}},
      {"benchmark_dynamic",
       {"sign-flipping circle, PLOT W 6, gamma 0.9, M 10 vs naive LQR, T 2000",
        benchmark_dynamic}},
      {"uniform_random",
       {"i.i.d. uniform planar targets, PLOT W 2, gamma 0.02, M 0.7 vs naive LQR, T 2000",
        uniform_random}},
      {"naive_rls_contrast",
       {"sqrt(T) spiral, PLOT vs Naive-RLS with W 10, gamma 0.8, M 1 (box), T 2000",
        naive_rls_contrast}},
  };
  return entries;
}

}  // namespace

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : catalog()) names.push_back(name);
  return names;
}

std::string scenario_description(const std::string& name) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second.description;
}

std::vector<ExperimentConfig> make_scenario(const std::string& name, std::uint64_t seed) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second.build(seed);
}

std::vector<ExperimentResult> run_scenario(const std::string& name, std::uint64_t seed,
                                           const std::optional<fs::path>& out) {
  std::vector<ExperimentResult> results;
  for (const auto& cfg : make_scenario(name, seed)) {
    results.push_back(run_experiment(cfg));
    if (out) write_outputs(results.back(), *out / cfg.name);
  }
  if (out) {
    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "experiment,T,label,kind,W,gamma,final_regret,cost\n");
    for (const auto& res : results) {
      for (const auto& r : res.runs) {
        fmt::format_to(it, "{},{},{},{},{},{:.17g},{:.17g},{:.17g}\n", res.cfg.name, res.cfg.T,
                       r.spec.label, to_string(r.spec.kind), r.W, r.gamma,
                       r.report.final_regret, r.trace.cumulative_costs.back());
      }
    }
    std::ofstream f(*out / "regrets.csv", std::ios::binary);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  return results;
}

}  // namespace plot
