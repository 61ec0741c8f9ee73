#include "plot/serialize.hpp"

#include "plot/errors.hpp"

namespace plot {

Json matrix_to_json(const MatrixXd& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError("matrix must be a non-empty array of rows");
  }
  const auto rows = j.size();
  const auto cols = j[0].size();
  MatrixXd M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError("ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ConfigError("matrix entries must be numbers");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

Json vector_to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("vector must be an array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("vector entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

Json schedule_to_json(const TargetSchedule& sched) {
  Json S = Json::array();
  for (const auto& m : sched.S) S.push_back(matrix_to_json(m));
  return {{"p", sched.p}, {"n_r", sched.n_r}, {"affine", sched.affine}, {"S", std::move(S)}};
}

TargetSchedule schedule_from_json(const Json& j) {
  TargetSchedule sched;
  try {
    sched.p = j.at("p").get<int>();
    sched.n_r = j.at("n_r").get<int>();
    sched.affine = j.at("affine").get<bool>();
    for (const auto& m : j.at("S")) sched.S.push_back(matrix_from_json(m));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  sched.validate();
  return sched;
}

Json learner_to_json(const Learner& lrn, int clock) {
  return {{"S_hat", matrix_to_json(lrn.S_hat)}, {"P", matrix_to_json(lrn.P)},
          {"gamma", lrn.gamma},                 {"eps", lrn.eps},
          {"M", lrn.M},                         {"updates", lrn.updates},
          {"clock", clock}};
}

Learner learner_from_json(const Json& j, int* clock) {
  Learner l;
  try {
    l.S_hat = matrix_from_json(j.at("S_hat"));
    l.P = matrix_from_json(j.at("P"));
    l.gamma = j.at("gamma").get<double>();
    l.eps = j.at("eps").get<double>();
    l.M = j.at("M").get<double>();
    l.updates = j.value("updates", 0L);
    if (clock) *clock = j.value("clock", 0);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("learner: ") + e.what());
  }
  if (l.P.rows() != l.P.cols() || l.P.cols() != l.S_hat.cols()) {
    throw DimensionMismatch("learner snapshot has inconsistent shapes");
  }
  return l;
}

std::string to_string(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::kWeightedBox: return "box";
    case ProjectionMode::kUnweightedSpectral: return "spectral";
    case ProjectionMode::kNone: return "none";
  }
  return "unknown";
}

ProjectionMode projection_from_string(const std::string& name) {
  if (name == "box") return ProjectionMode::kWeightedBox;
  if (name == "spectral") return ProjectionMode::kUnweightedSpectral;
  if (name == "none") return ProjectionMode::kNone;
  throw ConfigError("unknown projection '" + name + "'");
}

std::string to_string(LearnerInit init) {
  return init == LearnerInit::kIdentity ? "identity" : "zero";
}

LearnerInit learner_init_from_string(const std::string& name) {
  if (name == "identity") return LearnerInit::kIdentity;
  if (name == "zero") return LearnerInit::kZero;
  throw ConfigError("unknown learner initialization '" + name + "'");
}

}  // namespace plot
