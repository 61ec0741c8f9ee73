#include "plot/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "plot/errors.hpp"

namespace plot {

namespace {

void require_unit_open(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError(std::string(name) + " must lie in (0,1)");
}

}  // namespace

std::array<double, 4> prediction_betas(const PredictionBoundParams& prm) {
  require_unit_open(prm.gamma, "gamma");
  const double n = prm.n;
  const double p = prm.p;
  const double D2 = prm.D_r * prm.D_r;
  const double b1 = 2.0 * std::sqrt(n) * prm.M * (prm.eps + p * D2) / (1.0 - prm.gamma);
  const double b2 = n * p * std::pow(1.0 + std::sqrt(p) * prm.M, 2) * D2;
  const double b3 = b2;
  const double b4 =
      2.0 * prm.gamma * prm.eps * n * prm.M * prm.M + b2 * std::log((prm.eps + p * D2) / prm.eps);
  return {b1, b2, b3, b4};
}

double prediction_regret_bound(const PredictionBoundParams& prm) {
  const auto [b1, b2, b3, b4] = prediction_betas(prm);
  const double g = prm.gamma;
  return b1 / (1.0 - g) * prm.V_k + b2 * prm.T * std::log(1.0 / g) +
         prm.k * b3 * std::log(1.0 / (1.0 - g)) + prm.k * b4;
}

std::array<double, 5> control_alphas(const ControlBoundParams& prm) {
  require_unit_open(prm.gamma, "gamma");
  require_unit_open(prm.rho, "rho");
  PredictionBoundParams pp;
  pp.n = prm.n;
  pp.p = prm.p;
  pp.M = prm.M;
  pp.D_r = prm.D_r;
  pp.eps = prm.eps;
  pp.gamma = prm.gamma;
  const auto [b1, b2, b3, b4] = prediction_betas(pp);
  const double s = 2.0 * prm.c0 * prm.c0 * prm.norm_Sigma;
  const double a1 = s * std::pow(prm.norm_A + 1.0, 2) * prm.D_r * prm.D_r;
  const double a2 = 2.0 * s * b1 * std::sqrt(static_cast<double>(prm.p)) * prm.M * prm.M;
  return {a1, a2, s * b2, s * b3, s * b4};
}

std::array<double, 5> control_regret_bound_terms(const ControlBoundParams& prm) {
  const auto a = control_alphas(prm);
  const double rho = prm.rho;
  const double g = prm.gamma;
  const double Wt = std::min(1.0 / (1.0 - rho), static_cast<double>(prm.W));
  return {
      a[0] * std::pow(rho, 2.0 * prm.W) / ((1.0 - rho) * (1.0 - rho)) * prm.T,
      a[1] * std::pow(Wt, 4) * prm.V_T / (1.0 - g),
      -a[2] * Wt * Wt * (prm.T + 1.0) * std::log(g),
      -a[3] * std::pow(Wt, 3) * std::log(1.0 - g),
      a[4] * std::pow(Wt, 3),
  };
}

double control_regret_bound(const ControlBoundParams& prm) {
  const auto terms = control_regret_bound_terms(prm);
  double total = 0.0;
  for (double v : terms) total += v;
  return total;
}

}  // namespace plot
