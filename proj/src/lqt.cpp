#include "plot/lqt.hpp"

#include <cmath>
#include <fmt/format.h>

#include "plot/errors.hpp"

namespace plot {

namespace {

Eigen::LLT<MatrixXd> factor_spd(const MatrixXd& S, const char* what) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw Singularity(fmt::format("{} is not numerically positive definite", what));
  }
  return llt;
}

MatrixXd riccati_map(const LinearSystem& sys, const MatrixXd& X) {
  const MatrixXd BtX = sys.B.transpose() * X;
  const MatrixXd Sigma = sys.R + BtX * sys.B;
  const auto llt = factor_spd(Sigma, "R + BᵀXB");
  const MatrixXd BtXA = BtX * sys.A;
  MatrixXd next = sys.Q + sys.A.transpose() * X * sys.A -
                  BtXA.transpose() * llt.solve(BtXA);
  return 0.5 * (next + next.transpose());
}

void check_sizes(std::span<const VectorXd> vs, int n, const char* what) {
  for (const auto& v : vs) {
    if (v.size() != n) {
      throw DimensionMismatch(fmt::format("{}: expected size {}, got {}", what, n, v.size()));
    }
  }
}

}  // namespace

void LinearSystem::validate() const {
  const auto n = A.rows();
  const auto m = B.cols();
  if (n == 0 || m == 0) throw DimensionMismatch("empty system");
  if (A.cols() != n) throw DimensionMismatch("A must be square");
  if (B.rows() != n) throw DimensionMismatch("B must have as many rows as A");
  if (Q.rows() != n || Q.cols() != n) throw DimensionMismatch("Q must be n x n");
  if (R.rows() != m || R.cols() != m) throw DimensionMismatch("R must be m x m");
  if (!is_symmetric(Q, 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff())))
    throw DomainError("Q must be symmetric");
  if (!is_symmetric(R, 1e-12 * (1.0 + R.cwiseAbs().maxCoeff())))
    throw DomainError("R must be symmetric");
  if (min_eigenvalue_sym(Q) <= 0.0) throw DomainError("Q must be positive definite");
  if (min_eigenvalue_sym(R) <= 0.0) throw DomainError("R must be positive definite");
}

MatrixXd solve_riccati(const LinearSystem& sys, double tol, int max_iter) {
  sys.validate();
  if (!(tol > 0.0)) throw DomainError("Riccati tolerance must be positive");
  MatrixXd X = sys.Q;
  double residual = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    MatrixXd next = riccati_map(sys, X);
    residual = (next - X).norm();
    if (residual <= tol) return X;
    if (!std::isfinite(residual)) break;
    X = std::move(next);
  }
  throw NonConvergence(fmt::format(
      "Riccati iteration stopped at residual {:.3e} after {} iterations "
      "(system may not be stabilizable)",
      residual, max_iter));
}

double riccati_residual(const LinearSystem& sys, const MatrixXd& X) {
  return (X - riccati_map(sys, X)).norm();
}

LqtSolution compute_gains(const LinearSystem& sys, const MatrixXd& X, int W) {
  sys.validate();
  if (X.rows() != sys.n() || X.cols() != sys.n()) throw DimensionMismatch("X must be n x n");
  if (W < 0) throw DomainError("number of feedforward gains must be nonnegative");

  LqtSolution out;
  out.A = sys.A;
  out.B = sys.B;
  out.X = X;
  out.Sigma = sys.R + sys.B.transpose() * X * sys.B;
  const auto llt = factor_spd(out.Sigma, "Σ = R + BᵀXB");
  out.sigma_inv_Bt = llt.solve(sys.B.transpose());
  out.K = out.sigma_inv_Bt * X * sys.A;
  out.A_cl = sys.A - sys.B * out.K;
  if (spectral_radius(out.A_cl) >= 1.0) {
    throw NonConvergence("closed loop A - BK is not Schur stable");
  }

  // K_{t+1} from K_t through one multiplication by A_clᵀ.
  out.feedforward.reserve(W);
  MatrixXd G = X;
  for (int t = 0; t < W; ++t) {
    out.feedforward.push_back(out.sigma_inv_Bt * G);
    G = out.A_cl.transpose() * G;
  }

  const double x_max = max_eigenvalue_sym(X);
  const double x_min = min_eigenvalue_sym(X);
  const double r_min = min_eigenvalue_sym(sys.R);
  const double q_min = min_eigenvalue_sym(sys.Q);
  out.c0 = spectral_norm(sys.B) * x_max / r_min * std::sqrt(x_max / x_min);
  out.rho = std::sqrt(1.0 - q_min / x_max);
  return out;
}

void evaluate_costs(SimulationTrace& trace, const MatrixXd& Q, const MatrixXd& R,
                    const MatrixXd& QT) {
  const int T = trace.horizon();
  if (T < 0) throw DimensionMismatch("trace has no states");
  if (static_cast<int>(trace.references.size()) != T + 1)
    throw DimensionMismatch("trace needs one reference per state");
  if (static_cast<int>(trace.inputs.size()) != T)
    throw DimensionMismatch("trace needs one input per transition");
  trace.stage_costs.assign(T + 1, 0.0);
  trace.cumulative_costs.assign(T + 1, 0.0);
  double total = 0.0;
  for (int t = 0; t <= T; ++t) {
    const VectorXd e = trace.states[t] - trace.references[t];
    const double c = t < T ? weighted_sq_norm(e, Q) + weighted_sq_norm(trace.inputs[t], R)
                           : weighted_sq_norm(e, QT);
    total += c;
    trace.stage_costs[t] = c;
    trace.cumulative_costs[t] = total;
  }
}

double cumulative_cost(const SimulationTrace& trace, const MatrixXd& Q, const MatrixXd& R,
                       const MatrixXd& QT) {
  const int T = trace.horizon();
  if (T < 0) return 0.0;
  if (static_cast<int>(trace.references.size()) != T + 1 ||
      static_cast<int>(trace.inputs.size()) != T)
    throw DimensionMismatch("inconsistent trace lengths");
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    total += weighted_sq_norm(trace.states[t] - trace.references[t], Q) +
             weighted_sq_norm(trace.inputs[t], R);
  }
  return total + weighted_sq_norm(trace.states[T] - trace.references[T], QT);
}

double replay_defect(const SimulationTrace& trace, const MatrixXd& A, const MatrixXd& B) {
  double worst = 0.0;
  for (int t = 0; t < trace.horizon(); ++t) {
    const VectorXd pred = A * trace.states[t] + B * trace.inputs[t];
    worst = std::max(worst, (trace.states[t + 1] - pred).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<VectorXd> optimal_feedforward(const LqtSolution& lqt,
                                          std::span<const VectorXd> refs) {
  const int T = static_cast<int>(refs.size()) - 1;
  check_sizes(refs, lqt.n(), "reference");
  std::vector<VectorXd> q(std::max(T, 0));
  VectorXd g = VectorXd::Zero(lqt.n());
  const MatrixXd A_cl_t = lqt.A_cl.transpose();
  for (int t = T - 1; t >= 0; --t) {
    const VectorXd w = lqt.A * refs[t] - refs[t + 1];
    g = lqt.X * w + A_cl_t * g;
    q[t] = lqt.sigma_inv_Bt * g;
  }
  return q;
}

SimulationTrace optimal_noncausal_trace(const LinearSystem& sys, const LqtSolution& lqt,
                                        std::span<const VectorXd> refs, const VectorXd& x0) {
  if (refs.empty()) throw DimensionMismatch("need at least one reference");
  if (x0.size() != sys.n()) throw DimensionMismatch("x0 has wrong size");
  const int T = static_cast<int>(refs.size()) - 1;
  const auto q = optimal_feedforward(lqt, refs);

  SimulationTrace trace;
  trace.states.reserve(T + 1);
  trace.inputs.reserve(T);
  trace.references.assign(refs.begin(), refs.end());
  trace.states.push_back(x0);
  for (int t = 0; t < T; ++t) {
    const VectorXd& x = trace.states.back();
    VectorXd u = -lqt.K * (x - refs[t]) - q[t];
    trace.states.push_back(sys.A * x + sys.B * u);
    trace.inputs.push_back(std::move(u));
  }
  trace.feedforward = q;
  evaluate_costs(trace, sys.Q, sys.R, lqt.X);
  return trace;
}

VectorXd receding_horizon_feedforward(const LqtSolution& lqt, const VectorXd& r_t,
                                      std::span<const VectorXd> predictions, int terms) {
  const int W = static_cast<int>(predictions.size());
  if (terms < 0) terms = W;
  if (terms > W) throw DimensionMismatch("more feedforward terms than predictions");
  if (terms > lqt.horizon()) throw DimensionMismatch("not enough feedforward gains");
  if (r_t.size() != lqt.n()) throw DimensionMismatch("reference has wrong size");
  check_sizes(predictions, lqt.n(), "prediction");

  VectorXd q = VectorXd::Zero(lqt.m());
  const VectorXd* current = &r_t;
  for (int i = 0; i < terms; ++i) {
    const VectorXd& next = predictions[i];
    q += lqt.feedforward[i] * (lqt.A * *current - next);
    current = &next;
  }
  return q;
}

VectorXd receding_horizon_input(const LqtSolution& lqt, const VectorXd& x_t,
                                const VectorXd& r_t, std::span<const VectorXd> predictions,
                                int terms) {
  if (x_t.size() != lqt.n()) throw DimensionMismatch("state has wrong size");
  return -lqt.K * (x_t - r_t) - receding_horizon_feedforward(lqt, r_t, predictions, terms);
}

RegretReport regret_direct(const SimulationTrace& policy, const SimulationTrace& optimal) {
  const int T = policy.horizon();
  if (optimal.horizon() != T) throw RealizationMismatch("traces have different horizons");
  for (int t = 0; t <= T; ++t) {
    if (policy.references[t] != optimal.references[t]) {
      throw RealizationMismatch(fmt::format("targets differ at step {}", t));
    }
  }
  if (T >= 0 && policy.states[0] != optimal.states[0]) {
    throw RealizationMismatch("initial states differ");
  }
  if (static_cast<int>(policy.cumulative_costs.size()) != T + 1 ||
      static_cast<int>(optimal.cumulative_costs.size()) != T + 1) {
    throw DimensionMismatch("costs have not been evaluated");
  }
  RegretReport rep;
  rep.regret.resize(T + 1);
  for (int t = 0; t <= T; ++t) {
    rep.regret[t] = policy.cumulative_costs[t] - optimal.cumulative_costs[t];
  }
  rep.cost_policy = policy.cumulative_costs.back();
  rep.cost_optimal = optimal.cumulative_costs.back();
  rep.final_regret = rep.cost_policy - rep.cost_optimal;
  return rep;
}

double regret_via_pdl(const LqtSolution& lqt, std::span<const VectorXd> qhat,
                      std::span<const VectorXd> refs) {
  const auto q = optimal_feedforward(lqt, refs);
  if (qhat.size() != q.size()) throw DimensionMismatch("need one feedforward term per step");
  double total = 0.0;
  for (std::size_t t = 0; t < q.size(); ++t) {
    total += weighted_sq_norm(qhat[t] - q[t], lqt.Sigma);
  }
  return total;
}

std::vector<VectorXd> lqt_to_lqr(const MatrixXd& A, std::span<const VectorXd> refs) {
  std::vector<VectorXd> w;
  if (refs.size() < 2) return w;
  check_sizes(refs, static_cast<int>(A.rows()), "reference");
  w.reserve(refs.size() - 1);
  for (std::size_t t = 0; t + 1 < refs.size(); ++t) w.push_back(A * refs[t] - refs[t + 1]);
  return w;
}

}  // namespace plot
