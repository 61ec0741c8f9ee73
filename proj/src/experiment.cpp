#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "plot/errors.hpp"
#include "plot/harness.hpp"

namespace plot {

namespace fs = std::filesystem;

LinearSystem build_plant(const PlantSpec& spec) {
  LinearSystem sys = spec.kind == PlantSpec::Kind::kQuadrotor ? build_quadrotor(spec.quadrotor)
                                                             : spec.matrices;
  sys.validate();
  return sys;
}

BuiltTarget build_target(const ExperimentConfig& cfg, int n) {
  const TargetSpec& ts = cfg.target;
  const int T = cfg.T;
  BuiltTarget out;
  VectorXd r0;
  if (ts.kind == "circle") {
    const std::vector<MatrixXd> planar(T + 1, make_circle(ts.theta, ts.Ts));
    out.schedule = planar_to_spatial(planar);
    r0 = circle_initial_state(ts.theta, ts.Ts, ts.radius, ts.height);
  } else if (ts.kind == "benchmark") {
    out.schedule = planar_to_spatial(make_benchmark_dynamic(T, ts.Ts, ts.theta));
    r0 = circle_initial_state(ts.theta, ts.Ts);
  } else if (ts.kind == "spiral") {
    const SpiralSchedule sp =
        make_sqrtT_spiral(T, cfg.seed, ts.theta, ts.Ts, ts.scale_lo, ts.scale_hi, ts.shift);
    out.schedule = planar_to_spatial(sp.S);
    r0 = circle_initial_state(ts.theta, ts.Ts);
  } else if (ts.kind == "uniform") {
    auto [sched, first] = make_uniform_random(T, cfg.seed);
    out.schedule = std::move(sched);
    r0 = std::move(first);
  } else if (ts.kind == "schedule") {
    out.schedule = ts.schedule;
    out.schedule.S.resize(T + 1);
    r0 = ts.r0;
  } else {
    throw ConfigError("unknown target kind '" + ts.kind + "'");
  }
  out.schedule.validate();
  if (r0.size() != out.schedule.n_r) throw ConfigError("initial target has wrong dimension");
  if (out.schedule.n_r > n) throw ConfigError("target has more coordinates than the plant");

  TargetProcess proc(out.schedule, r0, std::numeric_limits<double>::infinity());
  out.raw = proc.rollout();
  out.max_norm = proc.max_norm();
  out.lift = out.schedule.n_r == n ? ReferenceLift::identity(n)
                                   : ReferenceLift::leading(n, out.schedule.n_r);
  out.V_T = path_length_V(out.schedule);
  out.L_T = path_length_L(out.raw);
  return out;
}

VectorXd initial_state(const ExperimentConfig& cfg, int n) {
  if (cfg.x0.size() > 0) {
    if (cfg.x0.size() != n) throw ConfigError("x0 has wrong dimension");
    return cfg.x0;
  }
  VectorXd x0 = VectorXd::Zero(n);
  if (cfg.plant.kind == PlantSpec::Kind::kQuadrotor) x0.head(3) << 0.6, 0.0, 0.4;
  return x0;
}

bool ExperimentResult::ok() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const ControllerRun& ExperimentResult::run(const std::string& label) const {
  for (const auto& r : runs) {
    if (r.spec.label == label) return r;
  }
  throw ConfigError("no controller labelled '" + label + "'");
}

namespace {

[[noreturn]] void rethrow_at(const std::string& label, int t) {
  const std::string where = fmt::format("{} at step {}: ", label, t);
  try {
    throw;
  } catch (const NumericalBreakdown& e) {
    throw NumericalBreakdown(where + e.what());
  } catch (const SolverFailure& e) {
    throw SolverFailure(where + e.what());
  } catch (const DimensionMismatch& e) {
    throw DimensionMismatch(where + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + e.what());
  }
}

double max_regressor_sq_norm(const BuiltTarget& target) {
  const auto& s = target.schedule;
  RegressorBuffer buf(s.n_r, s.p, s.affine);
  double best = 0.0;
  for (std::size_t t = 0; t < target.raw.size(); ++t) {
    if (t == 0) buf.reset(target.raw[0]);
    else buf.push(target.raw[t]);
    best = std::max(best, buf.z().squaredNorm());
  }
  return best;
}

int resolve_horizon(const ControllerSpec& c, int T, double rho) {
  if (c.kind == ControllerKind::kNaiveLqr) return 0;
  if (!c.tune_W) return c.W;
  return std::min(T, tune_horizon(std::max(T, 2), rho));
}

double resolve_gamma(const ControllerSpec& c, int T, double V_T) {
  switch (c.gamma_rule) {
    case ControllerSpec::GammaRule::kFixed: return c.gamma;
    case ControllerSpec::GammaRule::kTuned: return tune_gamma(std::max(T, 2), V_T, c.M);
    case ControllerSpec::GammaRule::kPower: return tune_gamma_power(T, c.c_gamma, c.a);
  }
  return c.gamma;
}

void add_check(std::vector<CheckResult>& checks, std::string name, bool pass,
               std::string detail) {
  checks.push_back({std::move(name), pass, std::move(detail)});
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.cfg = cfg;
  res.sys = build_plant(cfg.plant);
  const int n = res.sys.n();
  const int T = cfg.T;
  res.target = build_target(cfg, n);
  const VectorXd x0 = initial_state(cfg, n);
  const std::vector<VectorXd> refs = res.target.lift.lift(res.target.raw);

  const MatrixXd X = solve_riccati(res.sys);
  // Gains are synthesized once for the longest horizon among controllers.
  const LqtSolution probe = compute_gains(res.sys, X, 1);
  std::vector<int> horizons;
  std::vector<double> gammas;
  int W_max = 1;
  for (const auto& c : cfg.controllers) {
    horizons.push_back(resolve_horizon(c, T, probe.rho));
    gammas.push_back(resolve_gamma(c, T, res.target.V_T));
    W_max = std::max(W_max, horizons.back());
  }
  res.lqt = W_max == 1 ? probe : compute_gains(res.sys, X, W_max);
  res.optimal = optimal_noncausal_trace(res.sys, res.lqt, refs, x0);
  const double J_opt = res.optimal.cumulative_costs.back();
  const double z_sq = max_regressor_sq_norm(res.target);
  const auto& sched = res.target.schedule;

  for (std::size_t ci = 0; ci < cfg.controllers.size(); ++ci) {
    const ControllerSpec& spec = cfg.controllers[ci];
    ControllerRun run;
    run.spec = spec;
    run.W = horizons[ci];
    run.gamma = gammas[ci];

    ControllerConfig cc;
    cc.kind = spec.kind;
    cc.W = std::max(1, run.W);
    cc.gamma = run.gamma;
    cc.eps = spec.eps;
    cc.M = spec.M;
    cc.projection = spec.projection;
    cc.init = spec.init;
    cc.lift = res.target.lift;
    TrackingController ctl(cc, res.lqt, T, sched.n_r, sched.p, sched.affine);

    SimulationTrace& tr = run.trace;
    tr.states.reserve(T + 1);
    tr.states.push_back(x0);
    tr.references = refs;
    tr.raw_targets = res.target.raw;
    for (int t = 0; t < T; ++t) {
      ControlStep step;
      try {
        step = ctl.step(tr.states.back(), res.target.raw[t]);
      } catch (const Error&) {
        rethrow_at(spec.label, t);
      }
      tr.states.push_back(res.sys.A * tr.states.back() + res.sys.B * step.u);
      tr.inputs.push_back(std::move(step.u));
      tr.feedforward.push_back(step.feedforward);
      tr.predictions.push_back(std::move(step.predictions));
      run.qhat.push_back(std::move(step.feedforward));
    }
    evaluate_costs(tr, res.sys.Q, res.sys.R, X);
    run.report = regret_direct(tr, res.optimal);
    run.report.path_length_V = res.target.V_T;
    run.report.path_length_L = res.target.L_T;
    run.pdl_regret = regret_via_pdl(res.lqt, run.qhat, refs);
    run.max_prediction_norm = ctl.max_prediction_norm();
    run.design_bound = std::numeric_limits<double>::infinity();
    if (const PredictorBank* bank = ctl.bank()) {
      run.max_design_norm = bank->max_design_norm();
      if (run.gamma < 1.0) run.design_bound = spec.eps + z_sq / (1.0 - run.gamma);
      for (int k = 1; k <= bank->horizon(); ++k) {
        run.prediction_regret.push_back(prediction_regret(*bank, k));
      }
    }

    // Runtime invariants, reported in summary.json and by the CLI exit code.
    const double J = tr.cumulative_costs.back();
    const std::string& L = spec.label;
    double x_scale = 1.0;
    for (const auto& x : tr.states) x_scale = std::max(x_scale, x.cwiseAbs().maxCoeff());
    const double defect = replay_defect(tr, res.sys.A, res.sys.B);
    add_check(res.checks, L + ": dynamics", defect <= 1e-9 * x_scale,
              fmt::format("defect {:.3e}", defect));
    add_check(res.checks, L + ": optimality",
              run.report.final_regret >= -1e-9 * (1.0 + J_opt),
              fmt::format("regret {:.6g}", run.report.final_regret));
    const double pdl_gap = std::abs(run.report.final_regret - run.pdl_regret);
    add_check(res.checks, L + ": pdl identity", pdl_gap <= 1e-6 * (1.0 + J),
              fmt::format("|direct - pdl| = {:.3e}", pdl_gap));
    if (!tr.predictions.empty() && !tr.predictions[0].empty()) {
      bool zero_tail = true;
      for (int t = 0; t < T; ++t) {
        for (std::size_t k = 1; k <= tr.predictions[t].size(); ++k) {
          if (t + static_cast<int>(k) > T && tr.predictions[t][k - 1].cwiseAbs().maxCoeff() != 0.0) {
            zero_tail = false;
          }
        }
      }
      add_check(res.checks, L + ": boundary rule", zero_tail, "predictions past T are zero");
    }
    if (std::isfinite(run.design_bound)) {
      add_check(res.checks, L + ": design matrix bound",
                run.max_design_norm <= run.design_bound * (1.0 + 1e-12),
                fmt::format("max |P| {:.6g} <= {:.6g}", run.max_design_norm, run.design_bound));
    }
    res.runs.push_back(std::move(run));
  }
  res.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void write_trace_csv(const fs::path& path, const SimulationTrace& trace,
                     const std::vector<double>& regret) {
  const int T = trace.horizon();
  const auto n = trace.states.front().size();
  const auto m = trace.inputs.empty() ? 0 : trace.inputs.front().size();
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "t");
  for (Eigen::Index i = 0; i < n; ++i) fmt::format_to(out, ",x_{}", i);
  for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(out, ",u_{}", i);
  for (Eigen::Index i = 0; i < n; ++i) fmt::format_to(out, ",r_{}", i);
  fmt::format_to(out, ",stage_cost,cum_cost,regret\n");
  for (int t = 0; t <= T; ++t) {
    fmt::format_to(out, "{}", t);
    for (Eigen::Index i = 0; i < n; ++i) fmt::format_to(out, ",{:.17g}", trace.states[t](i));
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t < T) fmt::format_to(out, ",{:.17g}", trace.inputs[t](i));
      else fmt::format_to(out, ",");
    }
    for (Eigen::Index i = 0; i < n; ++i) fmt::format_to(out, ",{:.17g}", trace.references[t](i));
    fmt::format_to(out, ",{:.17g},{:.17g},{:.17g}\n", trace.stage_costs[t],
                   trace.cumulative_costs[t], regret[t]);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + path.string());
  file.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Json summary_json(const ExperimentResult& res) {
  Json runs = Json::array();
  for (const auto& r : res.runs) {
    Json jr = {{"label", r.spec.label},
               {"kind", to_string(r.spec.kind)},
               {"cost", r.trace.cumulative_costs.back()},
               {"final_regret", r.report.final_regret},
               {"pdl_regret", r.pdl_regret}};
    if (r.spec.kind != ControllerKind::kNaiveLqr) {
      jr["W"] = r.W;
      jr["gamma"] = r.gamma;
      jr["eps"] = r.spec.eps;
      jr["M"] = r.spec.M;
      jr["projection"] = to_string(r.spec.projection);
      jr["init"] = to_string(r.spec.init);
      jr["max_prediction_norm"] = r.max_prediction_norm;
      jr["max_design_norm"] = r.max_design_norm;
      if (std::isfinite(r.design_bound)) jr["design_bound"] = r.design_bound;
      jr["prediction_regret"] = r.prediction_regret;
    }
    runs.push_back(std::move(jr));
  }
  Json checks = Json::array();
  for (const auto& c : res.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return {{"scenario", res.cfg.scenario},
          {"name", res.cfg.name},
          {"T", res.cfg.T},
          {"T_seconds", res.cfg.T * res.cfg.target.Ts},
          {"seed", res.cfg.seed},
          {"V_T", res.target.V_T},
          {"L_T", res.target.L_T},
          {"D_r", res.target.max_norm},
          {"c0", res.lqt.c0},
          {"rho", res.lqt.rho},
          {"optimal_cost", res.optimal.cumulative_costs.back()},
          {"controllers", std::move(runs)},
          {"checks", std::move(checks)},
          {"ok", res.ok()},
          {"wall_clock_s", res.wall_clock_s}};
}

void write_outputs(const ExperimentResult& res, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "config.json");
    f << config_to_json(res.cfg).dump(2) << '\n';
  }
  {
    std::ofstream f(dir / "summary.json");
    f << summary_json(res).dump(2) << '\n';
  }
  if (!res.cfg.write_traces) return;
  write_trace_csv(dir / "optimal.csv", res.optimal,
                  std::vector<double>(res.optimal.states.size(), 0.0));
  for (const auto& r : res.runs) {
    write_trace_csv(dir / (r.spec.label + ".csv"), r.trace, r.report.regret);
  }
}

// ---------------------------------------------------------------------------
// Replay

namespace {

struct CsvTrace {
  int n = 0;
  int m = 0;
  std::vector<VectorXd> x, u, r;
  std::vector<double> stage, cum, regret;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, long row) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ReplayMismatch(fmt::format("unparseable value '{}' in row {}", cell, row), row);
  }
  return v;
}

CsvTrace read_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ReplayMismatch("empty trace", 0);
  const auto header = split(line);
  CsvTrace tr;
  for (const auto& h : header) {
    if (h.rfind("x_", 0) == 0) ++tr.n;
    else if (h.rfind("u_", 0) == 0) ++tr.m;
  }
  const std::size_t width = 1 + 2 * tr.n + tr.m + 3;
  if (tr.n == 0 || header.size() != width || header.front() != "t" ||
      header.back() != "regret") {
    throw ReplayMismatch("malformed trace header", 0);
  }
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) throw ReplayMismatch(fmt::format("row {} has wrong width", row), row);
    if (parse_cell(cells[0], row) != static_cast<double>(row)) {
      throw ReplayMismatch(fmt::format("row {} is out of order", row), row);
    }
    std::size_t c = 1;
    VectorXd x(tr.n), u(tr.m), r(tr.n);
    for (int i = 0; i < tr.n; ++i) x(i) = parse_cell(cells[c++], row);
    bool has_u = true;
    for (int i = 0; i < tr.m; ++i) {
      if (cells[c].empty()) has_u = false;
      else u(i) = parse_cell(cells[c], row);
      ++c;
    }
    for (int i = 0; i < tr.n; ++i) r(i) = parse_cell(cells[c++], row);
    tr.stage.push_back(parse_cell(cells[c++], row));
    tr.cum.push_back(parse_cell(cells[c++], row));
    tr.regret.push_back(parse_cell(cells[c++], row));
    tr.x.push_back(std::move(x));
    tr.r.push_back(std::move(r));
    if (has_u) tr.u.push_back(std::move(u));
    ++row;
  }
  if (tr.x.size() < 2 || tr.u.size() + 1 != tr.x.size()) {
    throw ReplayMismatch("trace must have T inputs and T + 1 states", row);
  }
  return tr;
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(b));
}

}  // namespace

ReplayReport replay_trace(const fs::path& trace_path, std::optional<ExperimentConfig> cfg,
                          double tol) {
  if (!cfg) cfg = load_config(trace_path.parent_path() / "config.json");
  const CsvTrace tr = read_trace(trace_path);
  const LinearSystem sys = build_plant(cfg->plant);
  if (tr.n != sys.n() || tr.m != sys.m()) {
    throw ReplayMismatch("trace dimensions do not match the configured plant", 0);
  }
  const int T = static_cast<int>(tr.u.size());
  if (T != cfg->T) throw ReplayMismatch("trace length does not match the configured T", T);

  const BuiltTarget target = build_target(*cfg, sys.n());
  const auto refs = target.lift.lift(target.raw);
  for (int t = 0; t <= T; ++t) {
    const VectorXd diff = tr.r[t] - refs[t];
    if (diff.cwiseAbs().maxCoeff() > 1e-12 * (1.0 + refs[t].cwiseAbs().maxCoeff())) {
      throw RealizationMismatch(fmt::format("targets differ from the configuration at row {}", t));
    }
  }
  const VectorXd x0 = initial_state(*cfg, sys.n());
  if ((tr.x[0] - x0).cwiseAbs().maxCoeff() > 0.0) {
    throw RealizationMismatch("initial state differs from the configuration");
  }

  ReplayReport rep;
  rep.rows = T + 1;
  const MatrixXd X = solve_riccati(sys);
  double cum = 0.0;
  for (int t = 0; t <= T; ++t) {
    if (t > 0) {
      const VectorXd pred = sys.A * tr.x[t - 1] + sys.B * tr.u[t - 1];
      for (int i = 0; i < sys.n(); ++i) {
        const double err = std::abs(pred(i) - tr.x[t](i));
        rep.max_state_error = std::max(rep.max_state_error, err);
        if (!close(tr.x[t](i), pred(i), tol)) {
          throw ReplayMismatch(fmt::format("state x_{} mismatch at row {}", i, t), t);
        }
      }
    }
    const VectorXd e = tr.x[t] - tr.r[t];
    const double stage = t < T ? weighted_sq_norm(e, sys.Q) + weighted_sq_norm(tr.u[t], sys.R)
                               : weighted_sq_norm(e, X);
    cum += stage;
    rep.max_cost_error = std::max({rep.max_cost_error, std::abs(stage - tr.stage[t]),
                                   std::abs(cum - tr.cum[t])});
    if (!close(tr.stage[t], stage, tol) || !close(tr.cum[t], cum, tol)) {
      throw ReplayMismatch(fmt::format("cost mismatch at row {}", t), t);
    }
  }

  const LqtSolution lqt = compute_gains(sys, X, 1);
  const SimulationTrace opt = optimal_noncausal_trace(sys, lqt, refs, x0);
  for (int t = 0; t <= T; ++t) {
    const double expected = tr.cum[t] - opt.cumulative_costs[t];
    rep.max_regret_error = std::max(rep.max_regret_error, std::abs(expected - tr.regret[t]));
    if (!close(tr.regret[t], expected, tol) &&
        std::abs(tr.regret[t] - expected) > tol * (1.0 + opt.cumulative_costs[t])) {
      throw ReplayMismatch(fmt::format("regret mismatch at row {}", t), t);
    }
  }
  return rep;
}

}  // namespace plot
