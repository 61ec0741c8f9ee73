#pragma once

// Tracking controllers built on the receding-horizon law: PLOT (one RLS
// predictor per look-ahead step), Naive-RLS (one one-step predictor rolled
// forward) and Naive LQR (no feedforward at all).

#include <optional>
#include <string>
#include <vector>

#include "plot/lqt.hpp"
#include "plot/rls.hpp"
#include "plot/target.hpp"

namespace plot {

enum class ControllerKind { kPlot, kNaiveRls, kNaiveLqr, kOptimalNoncausal };

std::string to_string(ControllerKind kind);
/// Accepts "plot", "naive_rls", "naive_lqr", "optimal"; throws ConfigError.
ControllerKind controller_kind_from_string(const std::string& name);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kPlot;
  int W = 1;
  double gamma = 1.0;
  double eps = 1e-4;
  double M = 10.0;
  ProjectionMode projection = ProjectionMode::kWeightedBox;
  LearnerInit init = LearnerInit::kIdentity;
  ReferenceLift lift;

  /// Throws DomainError / DimensionMismatch on invalid fields.
  void validate() const;
};

struct ControlStep {
  VectorXd u;
  /// Lifted predictions r_{t+1|t}..r_{t+W|t}; entries past T are zero.
  std::vector<VectorXd> predictions;
  /// Feedforward q̂_t of u = -K(x - r) - q̂.
  VectorXd feedforward;
};

/// Stateful causal controller. The caller feeds (x_t, r_t) for t = 0, 1, ...
/// in order; the target structure (n_r, p, affine) fixes the regressor.
class TrackingController {
 public:
  TrackingController(ControllerConfig cfg, const LqtSolution& lqt, int T, int n_r, int p,
                     bool affine);

  ControlStep step(const VectorXd& x_t, const VectorXd& r_raw);

  int time() const { return t_; }
  const ControllerConfig& config() const { return cfg_; }
  /// Predictor bank, null for Naive LQR.
  const PredictorBank* bank() const { return bank_ ? &*bank_ : nullptr; }
  /// Largest raw (target-space) prediction norm seen so far.
  double max_prediction_norm() const { return max_prediction_norm_; }

 private:
  std::vector<VectorXd> predict_raw(const VectorXd& r_raw);

  ControllerConfig cfg_;
  const LqtSolution& lqt_;
  int T_;
  int n_r_;
  int p_;
  bool affine_;
  std::optional<PredictorBank> bank_;
  RegressorBuffer buffer_;
  int t_ = 0;
  double max_prediction_norm_ = 0.0;
};

/// u = -K (x_t - r_t)
VectorXd naive_lqr_input(const MatrixXd& K, const VectorXd& x_t, const VectorXd& r_t);

/// W = ceil(-log T / (2 log rho)), at least 1.
int tune_horizon(int T, double rho);

/// gamma = 1 - sqrt(max(V_T, log^2 T / T) / (4 M T)), floored at 0.01.
double tune_gamma(int T, double V_T, double M);

/// gamma_a = 1 - c T^(-a), floored at 0.01.
double tune_gamma_power(int T, double c, double a);

}  // namespace plot
