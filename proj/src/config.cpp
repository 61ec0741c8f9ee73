#include <algorithm>
#include <fstream>

#include "plot/errors.hpp"
#include "plot/harness.hpp"

namespace plot {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

Json plant_to_json(const PlantSpec& p) {
  if (p.kind == PlantSpec::Kind::kQuadrotor) {
    return {{"kind", "quadrotor"},
            {"Ts", p.quadrotor.Ts},
            {"mass", p.quadrotor.mass},
            {"g", p.quadrotor.g}};
  }
  return {{"kind", "matrices"},
          {"A", matrix_to_json(p.matrices.A)},
          {"B", matrix_to_json(p.matrices.B)},
          {"Q", matrix_to_json(p.matrices.Q)},
          {"R", matrix_to_json(p.matrices.R)}};
}

PlantSpec plant_from_json(const Json& j) {
  PlantSpec p;
  const auto kind = get_or<std::string>(j, "kind", "quadrotor");
  if (kind == "quadrotor") {
    p.kind = PlantSpec::Kind::kQuadrotor;
    p.quadrotor.Ts = get_or(j, "Ts", p.quadrotor.Ts);
    p.quadrotor.mass = get_or(j, "mass", p.quadrotor.mass);
    p.quadrotor.g = get_or(j, "g", p.quadrotor.g);
  } else if (kind == "matrices") {
    p.kind = PlantSpec::Kind::kMatrices;
    try {
      p.matrices.A = matrix_from_json(j.at("A"));
      p.matrices.B = matrix_from_json(j.at("B"));
      p.matrices.Q = matrix_from_json(j.at("Q"));
      p.matrices.R = matrix_from_json(j.at("R"));
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("plant: ") + e.what());
    }
  } else {
    throw ConfigError("unknown plant kind '" + kind + "'");
  }
  return p;
}

Json target_to_json(const TargetSpec& t) {
  Json j = {{"kind", t.kind}, {"Ts", t.Ts}};
  if (t.kind == "circle") {
    j["theta"] = t.theta;
    j["radius"] = t.radius;
    j["height"] = t.height;
  } else if (t.kind == "benchmark") {
    j["theta"] = t.theta;
  } else if (t.kind == "spiral") {
    j["theta"] = t.theta;
    j["scale_lo"] = t.scale_lo;
    j["scale_hi"] = t.scale_hi;
    j["shift"] = {t.shift(0), t.shift(1)};
  } else if (t.kind == "schedule") {
    j["schedule"] = schedule_to_json(t.schedule);
    j["r0"] = vector_to_json(t.r0);
  }
  return j;
}

TargetSpec target_from_json(const Json& j, double plant_Ts) {
  TargetSpec t;
  t.kind = get_or<std::string>(j, "kind", t.kind);
  t.Ts = get_or(j, "Ts", plant_Ts);
  t.theta = get_or(j, "theta", t.theta);
  t.radius = get_or(j, "radius", t.radius);
  t.height = get_or(j, "height", t.height);
  t.scale_lo = get_or(j, "scale_lo", t.scale_lo);
  t.scale_hi = get_or(j, "scale_hi", t.scale_hi);
  if (j.contains("shift")) {
    const VectorXd s = vector_from_json(j.at("shift"));
    if (s.size() != 2) throw ConfigError("target shift must have two entries");
    t.shift = s;
  }
  if (t.kind == "schedule") {
    if (!j.contains("schedule") || !j.contains("r0")) {
      throw ConfigError("schedule target needs 'schedule' and 'r0'");
    }
    t.schedule = schedule_from_json(j.at("schedule"));
    t.r0 = vector_from_json(j.at("r0"));
  }
  return t;
}

Json controller_to_json(const ControllerSpec& c) {
  Json j = {{"label", c.label}, {"kind", to_string(c.kind)}};
  if (c.kind == ControllerKind::kNaiveLqr) return j;
  j["W"] = c.tune_W ? Json("tuned") : Json(c.W);
  switch (c.gamma_rule) {
    case ControllerSpec::GammaRule::kFixed: j["gamma"] = c.gamma; break;
    case ControllerSpec::GammaRule::kTuned: j["gamma"] = "tuned"; break;
    case ControllerSpec::GammaRule::kPower: j["gamma"] = {{"c", c.c_gamma}, {"a", c.a}}; break;
  }
  j["eps"] = c.eps;
  j["M"] = c.M;
  j["projection"] = to_string(c.projection);
  j["init"] = to_string(c.init);
  return j;
}

ControllerSpec controller_from_json(const Json& j, std::size_t index) {
  ControllerSpec c;
  c.kind = controller_kind_from_string(get_or<std::string>(j, "kind", "plot"));
  c.label = get_or<std::string>(j, "label", to_string(c.kind) + "_" + std::to_string(index));
  if (j.contains("W")) {
    const Json& w = j.at("W");
    if (w.is_string() && w.get<std::string>() == "tuned") c.tune_W = true;
    else if (w.is_number_integer()) c.W = w.get<int>();
    else throw ConfigError("W must be an integer or \"tuned\"");
  }
  if (j.contains("gamma")) {
    const Json& g = j.at("gamma");
    if (g.is_number()) {
      c.gamma = g.get<double>();
    } else if (g.is_string() && g.get<std::string>() == "tuned") {
      c.gamma_rule = ControllerSpec::GammaRule::kTuned;
    } else if (g.is_object()) {
      c.gamma_rule = ControllerSpec::GammaRule::kPower;
      c.c_gamma = get_or(g, "c", c.c_gamma);
      c.a = get_or(g, "a", c.a);
    } else {
      throw ConfigError("gamma must be a number, \"tuned\" or {\"c\", \"a\"}");
    }
  }
  c.eps = get_or(j, "eps", c.eps);
  c.M = get_or(j, "M", c.M);
  c.projection = projection_from_string(get_or<std::string>(j, "projection", "box"));
  c.init = learner_init_from_string(get_or<std::string>(j, "init", "identity"));
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (T < 1) throw ConfigError("T must be at least 1");
  if (controllers.empty()) throw ConfigError("no controllers configured");
  const std::vector<std::string> kinds = {"circle", "benchmark", "spiral", "uniform", "schedule"};
  if (std::find(kinds.begin(), kinds.end(), target.kind) == kinds.end()) {
    throw ConfigError("unknown target kind '" + target.kind + "'");
  }
  if (target.kind == "schedule" && target.schedule.horizon() < T) {
    throw ConfigError("explicit schedule is shorter than T");
  }
  for (std::size_t i = 0; i < controllers.size(); ++i) {
    if (controllers[i].kind == ControllerKind::kOptimalNoncausal) {
      throw ConfigError("the optimal controller is always computed; do not list it");
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (controllers[k].label == controllers[i].label) {
        throw ConfigError("duplicate controller label '" + controllers[i].label + "'");
      }
    }
  }
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.scenario = get_or<std::string>(j, "scenario", "");
  cfg.name = get_or<std::string>(j, "name", cfg.name);
  cfg.T = get_or(j, "T", cfg.T);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("plant")) cfg.plant = plant_from_json(j.at("plant"));
  const double Ts = cfg.plant.kind == PlantSpec::Kind::kQuadrotor ? cfg.plant.quadrotor.Ts : 0.1;
  cfg.target = target_from_json(j.value("target", Json::object()), Ts);
  if (j.contains("controllers")) {
    const Json& cs = j.at("controllers");
    if (!cs.is_array()) throw ConfigError("controllers must be an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      cfg.controllers.push_back(controller_from_json(cs[i], i));
    }
  }
  if (j.contains("x0")) cfg.x0 = vector_from_json(j.at("x0"));
  cfg.write_traces = get_or(j, "write_traces", true);
  cfg.validate();
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json cs = Json::array();
  for (const auto& c : cfg.controllers) cs.push_back(controller_to_json(c));
  Json j = {{"scenario", cfg.scenario},
            {"name", cfg.name},
            {"T", cfg.T},
            {"T_seconds", cfg.T * cfg.target.Ts},
            {"seed", cfg.seed},
            {"plant", plant_to_json(cfg.plant)},
            {"target", target_to_json(cfg.target)},
            {"controllers", std::move(cs)},
            {"write_traces", cfg.write_traces}};
  if (cfg.x0.size() > 0) j["x0"] = vector_to_json(cfg.x0);
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace plot
