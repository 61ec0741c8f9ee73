#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "plot/bounds.hpp"
#include "plot/errors.hpp"
#include "plot/harness.hpp"

namespace py = pybind11;
using namespace plot;

namespace {

// JSON crosses the boundary as text; the Python side parses it with json.
py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_python(const py::object& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::dict trace_dict(const SimulationTrace& tr) {
  py::dict d;
  d["states"] = tr.states;
  d["inputs"] = tr.inputs;
  d["references"] = tr.references;
  d["feedforward"] = tr.feedforward;
  d["stage_costs"] = tr.stage_costs;
  d["cumulative_costs"] = tr.cumulative_costs;
  return d;
}

py::dict result_dict(const ExperimentResult& res) {
  py::dict d = to_python(summary_json(res));
  py::dict traces;
  traces["optimal"] = trace_dict(res.optimal);
  for (const auto& r : res.runs) {
    py::dict t = trace_dict(r.trace);
    t["regret"] = r.report.regret;
    traces[py::str(r.spec.label)] = t;
  }
  d["traces"] = traces;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Predictive online tracking: LQT gains, RLS target prediction, experiment harness";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<NonConvergence>(m, "NonConvergence", base);
  py::register_exception<Singularity>(m, "Singularity", base);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<RealizationMismatch>(m, "RealizationMismatch", base);
  py::register_exception<NumericalBreakdown>(m, "NumericalBreakdown", base);
  py::register_exception<SolverFailure>(m, "SolverFailure", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ReplayMismatch>(m, "ReplayMismatch", base);

  py::class_<LinearSystem>(m, "LinearSystem")
      .def(py::init([](MatrixXd A, MatrixXd B, MatrixXd Q, MatrixXd R) {
             LinearSystem s{std::move(A), std::move(B), std::move(Q), std::move(R)};
             s.validate();
             return s;
           }),
           py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"))
      .def_readonly("A", &LinearSystem::A)
      .def_readonly("B", &LinearSystem::B)
      .def_readonly("Q", &LinearSystem::Q)
      .def_readonly("R", &LinearSystem::R)
      .def_property_readonly("n", &LinearSystem::n)
      .def_property_readonly("m", &LinearSystem::m);

  m.def(
      "build_quadrotor",
      [](double Ts, double mass, double g) { return build_quadrotor({Ts, mass, g}); },
      py::arg("Ts") = 0.1, py::arg("mass") = 0.033, py::arg("g") = 9.81);

  m.def("solve_riccati", &solve_riccati, py::arg("sys"), py::arg("tol") = kRiccatiTolerance,
        py::arg("max_iter") = kRiccatiMaxIterations);
  m.def("riccati_residual", &riccati_residual);

  py::class_<LqtSolution>(m, "LqtSolution")
      .def_readonly("X", &LqtSolution::X)
      .def_readonly("K", &LqtSolution::K)
      .def_readonly("Sigma", &LqtSolution::Sigma)
      .def_readonly("A_cl", &LqtSolution::A_cl)
      .def_readonly("feedforward", &LqtSolution::feedforward)
      .def_readonly("c0", &LqtSolution::c0)
      .def_readonly("rho", &LqtSolution::rho);

  m.def("compute_gains", &compute_gains, py::arg("sys"), py::arg("X"), py::arg("W"));
  m.def(
      "optimal_trace",
      [](const LinearSystem& sys, const LqtSolution& lqt, const std::vector<VectorXd>& refs,
         const VectorXd& x0) { return trace_dict(optimal_noncausal_trace(sys, lqt, refs, x0)); },
      py::arg("sys"), py::arg("lqt"), py::arg("refs"), py::arg("x0"));
  m.def(
      "receding_horizon_input",
      [](const LqtSolution& lqt, const VectorXd& x, const VectorXd& r,
         const std::vector<VectorXd>& preds, int terms) {
        return receding_horizon_input(lqt, x, r, preds, terms);
      },
      py::arg("lqt"), py::arg("x"), py::arg("r"), py::arg("predictions"), py::arg("terms") = -1);

  m.def("make_circle", &make_circle, py::arg("theta"), py::arg("Ts"));
  m.def("make_benchmark_dynamic", &make_benchmark_dynamic, py::arg("T"), py::arg("Ts") = 0.1,
        py::arg("theta0") = 0.06);
  m.def(
      "make_sqrtT_spiral",
      [](int T, std::uint64_t seed) {
        const auto sp = make_sqrtT_spiral(T, seed);
        py::dict d;
        d["S"] = sp.S;
        d["switch_steps"] = sp.switch_steps;
        d["factors"] = sp.factors;
        d["V_T"] = sp.V_T;
        return d;
      },
      py::arg("T"), py::arg("seed") = 0);

  py::enum_<ProjectionMode>(m, "ProjectionMode")
      .value("box", ProjectionMode::kWeightedBox)
      .value("spectral", ProjectionMode::kUnweightedSpectral)
      .value("none", ProjectionMode::kNone);
  py::enum_<LearnerInit>(m, "LearnerInit")
      .value("identity", LearnerInit::kIdentity)
      .value("zero", LearnerInit::kZero);

  py::class_<Learner>(m, "Learner")
      .def(py::init(&Learner::make), py::arg("n_r"), py::arg("d"), py::arg("gamma"),
           py::arg("eps"), py::arg("M"), py::arg("init") = LearnerInit::kIdentity)
      .def_readwrite("S_hat", &Learner::S_hat)
      .def_readonly("P", &Learner::P)
      .def_readonly("updates", &Learner::updates)
      .def("update", [](Learner& l, const VectorXd& r, const VectorXd& z,
                        ProjectionMode mode) { rls_update(l, r, z, mode); },
           py::arg("r"), py::arg("z"), py::arg("projection") = ProjectionMode::kWeightedBox);

  m.def("project_weighted_box", &project_weighted_box, py::arg("Y"), py::arg("P"), py::arg("M"),
        py::arg("kkt_tol") = 1e-8);
  m.def("project_spectral", &project_spectral, py::arg("Y"), py::arg("M"));

  m.def("tune_horizon", &tune_horizon, py::arg("T"), py::arg("rho"));
  m.def("tune_gamma", &tune_gamma, py::arg("T"), py::arg("V_T"), py::arg("M"));
  m.def("tune_gamma_power", &tune_gamma_power, py::arg("T"), py::arg("c"), py::arg("a"));

  m.def(
      "prediction_regret_bound",
      [](int n, int p, double M, double D_r, double eps, double gamma, int k, double T,
         double V_k) { return prediction_regret_bound({n, p, M, D_r, eps, gamma, k, T, V_k}); },
      py::kw_only(), py::arg("n"), py::arg("p"), py::arg("M"), py::arg("D_r"), py::arg("eps"),
      py::arg("gamma"), py::arg("k"), py::arg("T"), py::arg("V_k"));

  m.def("list_scenarios", &list_scenarios);
  m.def("scenario_description", &scenario_description);
  m.def(
      "run_config",
      [](const py::object& cfg, std::optional<std::filesystem::path> out) {
        const auto res = run_experiment(config_from_json(from_python(cfg)));
        if (out) write_outputs(res, *out);
        return result_dict(res);
      },
      py::arg("config"), py::arg("out") = py::none(),
      "Run an experiment from a config dict; returns the summary plus per-controller traces.");
  m.def(
      "run_scenario",
      [](const std::string& name, std::uint64_t seed, std::optional<std::filesystem::path> out) {
        py::list summaries;
        for (const auto& res : run_scenario(name, seed, out)) {
          summaries.append(to_python(summary_json(res)));
        }
        return summaries;
      },
      py::arg("name"), py::arg("seed") = 0, py::arg("out") = py::none());
  m.def(
      "replay",
      [](const std::filesystem::path& trace) {
        const auto rep = replay_trace(trace);
        py::dict d;
        d["rows"] = rep.rows;
        d["max_state_error"] = rep.max_state_error;
        d["max_cost_error"] = rep.max_cost_error;
        d["max_regret_error"] = rep.max_regret_error;
        return d;
      },
      py::arg("trace"));
}
