#pragma once

// Closed-form regret upper bounds for the k-step RLS predictor and for the
// PLOT controller. All inputs are plain scalars so the bounds can be
// evaluated for any run after the fact.

#include <array>

namespace plot {

struct PredictionBoundParams {
  int n = 1;            // target dimension
  int p = 1;            // AR memory
  double M = 1.0;       // bound on multi-step matrices
  double D_r = 1.0;     // bound on target states
  double eps = 1.0;     // initial regularization
  double gamma = 0.9;   // forgetting factor, must lie in (0,1)
  int k = 1;            // prediction step
  double T = 1.0;       // horizon
  double V_k = 0.0;     // path length of the k-step matrices
};

/// beta_1..beta_4 of the prediction bound.
std::array<double, 4> prediction_betas(const PredictionBoundParams& prm);

/// beta_1/(1-γ) V^k_T + beta_2 T log(1/γ) + k beta_3 log(1/(1-γ)) + k beta_4.
/// Throws DomainError unless γ ∈ (0,1).
double prediction_regret_bound(const PredictionBoundParams& prm);

struct ControlBoundParams {
  double c0 = 1.0;
  double rho = 0.5;
  int W = 1;
  double gamma = 0.9;
  double V_T = 0.0;
  double T = 1.0;
  double M = 1.0;
  int p = 1;
  int n = 1;            // target dimension
  double D_r = 1.0;
  double eps = 1.0;
  double norm_A = 1.0;
  double norm_Sigma = 1.0;
};

/// alpha_1..alpha_5 of the control bound.
std::array<double, 5> control_alphas(const ControlBoundParams& prm);

/// The five additive terms of the control bound, in order.
std::array<double, 5> control_regret_bound_terms(const ControlBoundParams& prm);

/// Sum of control_regret_bound_terms. Throws DomainError unless γ, ρ ∈ (0,1).
double control_regret_bound(const ControlBoundParams& prm);

}  // namespace plot
