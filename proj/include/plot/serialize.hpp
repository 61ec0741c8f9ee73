#pragma once

// JSON encodings of matrices (row-major nested arrays), target schedules and
// learner snapshots.

#include <nlohmann/json.hpp>

#include "plot/rls.hpp"
#include "plot/target.hpp"

namespace plot {

using Json = nlohmann::json;

Json matrix_to_json(const MatrixXd& M);
/// Accepts a nested array of equal-length rows; throws ConfigError otherwise.
MatrixXd matrix_from_json(const Json& j);

Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

Json schedule_to_json(const TargetSchedule& sched);
TargetSchedule schedule_from_json(const Json& j);

/// Snapshot of a learner together with the bank clock.
Json learner_to_json(const Learner& lrn, int clock);
Learner learner_from_json(const Json& j, int* clock = nullptr);

std::string to_string(ProjectionMode mode);
ProjectionMode projection_from_string(const std::string& name);
std::string to_string(LearnerInit init);
LearnerInit learner_init_from_string(const std::string& name);

}  // namespace plot
