#pragma once

// Linear-quadratic tracking: Riccati solution, gain synthesis, the optimal
// non-causal tracking law, the receding-horizon law and cost accounting.
//
// Sign convention used throughout: a tracking policy is written
//
//   u_t = -K (x_t - r_t) - q_t,
//
// where q_t is the feedforward term. The optimal non-causal controller uses
// q_t = sum_{i=t}^{T-1} K_{i-t} (A r_i - r_{i+1}).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

#include "plot/linalg.hpp"

namespace plot {

/// Plant x_{t+1} = A x_t + B u_t with stage cost |x - r|_Q^2 + |u|_R^2.
struct LinearSystem {
  MatrixXd A;
  MatrixXd B;
  MatrixXd Q;
  MatrixXd R;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  /// Throws DimensionMismatch or DomainError if the invariants are violated
  /// (square/consistent shapes, Q and R symmetric positive definite).
  void validate() const;
};

/// Default stopping tolerance of the Riccati iteration (Frobenius norm).
inline constexpr double kRiccatiTolerance = 1e-10;
inline constexpr int kRiccatiMaxIterations = 200000;

/// Stationary Riccati solution by value iteration from X_0 = Q.
///
/// Iterates X <- Q + AᵀXA - AᵀXB (R + BᵀXB)⁻¹ BᵀXA, symmetrizing each step,
/// and returns the first iterate whose fixed-point residual is <= tol.
/// Throws NonConvergence after max_iter iterations and Singularity if
/// R + BᵀXB cannot be factorized.
MatrixXd solve_riccati(const LinearSystem& sys, double tol = kRiccatiTolerance,
                       int max_iter = kRiccatiMaxIterations);

/// |X - (Q + AᵀXA - AᵀXB Σ⁻¹ BᵀXA)|_F
double riccati_residual(const LinearSystem& sys, const MatrixXd& X);

struct LqtSolution {
  MatrixXd A;      // plant transition, kept for feedforward sums
  MatrixXd B;
  MatrixXd X;      // Riccati solution, also the terminal weight
  MatrixXd K;      // feedback gain, m x n
  MatrixXd Sigma;  // R + BᵀXB
  MatrixXd A_cl;   // A - BK
  /// Σ⁻¹Bᵀ, obtained from a Cholesky solve of Σ.
  MatrixXd sigma_inv_Bt;
  /// K_0..K_{W-1}, K_t = Σ⁻¹Bᵀ (A_clᵀ)^t X.
  std::vector<MatrixXd> feedforward;
  double c0 = 0.0;
  double rho = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int horizon() const { return static_cast<int>(feedforward.size()); }
};

/// Builds K, Σ, the first W feedforward gains and the decay constants
/// (c0, rho). Throws Singularity if Σ is not positive definite and
/// NonConvergence if A - BK is not Schur stable.
LqtSolution compute_gains(const LinearSystem& sys, const MatrixXd& X, int W);

/// Trajectory record. Index t runs over 0..T for states/references/costs and
/// over 0..T-1 for inputs. The terminal stage cost is |x_T - r_T|_{Q_T}^2.
struct SimulationTrace {
  std::vector<VectorXd> states;
  std::vector<VectorXd> inputs;
  std::vector<VectorXd> references;   // lifted into plant coordinates
  std::vector<VectorXd> raw_targets;  // target space, may be empty
  /// predictions[t][k-1] = r_{t+k|t} (lifted); empty when not recorded.
  std::vector<std::vector<VectorXd>> predictions;
  /// Applied feedforward term q_t; empty when not recorded.
  std::vector<VectorXd> feedforward;
  std::vector<double> stage_costs;
  std::vector<double> cumulative_costs;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

/// Fills stage_costs and cumulative_costs from states, inputs, references.
void evaluate_costs(SimulationTrace& trace, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& QT);

/// J_T = sum_{t<T} |x_t - r_t|_Q^2 + |u_t|_R^2 + |x_T - r_T|_{Q_T}^2
double cumulative_cost(const SimulationTrace& trace, const MatrixXd& Q,
                       const MatrixXd& R, const MatrixXd& QT);

/// max_t |x_{t+1} - (A x_t + B u_t)|_inf over the trace.
double replay_defect(const SimulationTrace& trace, const MatrixXd& A,
                     const MatrixXd& B);

/// Optimal feedforward terms q_0..q_{T-1} for references r_0..r_T, computed
/// by the backward recursion g_t = X w_t + A_clᵀ g_{t+1}, q_t = Σ⁻¹Bᵀ g_t
/// with w_t = A r_t - r_{t+1}.
std::vector<VectorXd> optimal_feedforward(const LqtSolution& lqt,
                                          std::span<const VectorXd> refs);

/// Rolls out the optimal non-causal controller from x0 against r_0..r_T and
/// returns the trace with costs evaluated under Q_T = X.
SimulationTrace optimal_noncausal_trace(const LinearSystem& sys,
                                        const LqtSolution& lqt,
                                        std::span<const VectorXd> refs,
                                        const VectorXd& x0);

/// Feedforward term of the receding-horizon law,
///   q = sum_{i=0}^{terms-1} K_i (A r_{t+i|t} - r_{t+i+1|t}),  r_{t|t} = r_t.
/// `predictions` holds r_{t+1|t}..r_{t+W|t}; `terms` defaults to W and is
/// lowered near the end of the horizon so that no term reaches past T-1.
VectorXd receding_horizon_feedforward(const LqtSolution& lqt,
                                      const VectorXd& r_t,
                                      std::span<const VectorXd> predictions,
                                      int terms = -1);

/// u = -K (x_t - r_t) - receding_horizon_feedforward(...)
VectorXd receding_horizon_input(const LqtSolution& lqt, const VectorXd& x_t,
                                const VectorXd& r_t,
                                std::span<const VectorXd> predictions,
                                int terms = -1);

struct RegretReport {
  double cost_policy = 0.0;
  double cost_optimal = 0.0;
  /// regret[t] = J_t(pi) - J_t(u*), prefix differences of cumulative cost.
  std::vector<double> regret;
  double final_regret = 0.0;
  double path_length_V = std::numeric_limits<double>::quiet_NaN();
  double path_length_L = std::numeric_limits<double>::quiet_NaN();
};

/// Throws RealizationMismatch if the traces disagree on references or x0.
RegretReport regret_direct(const SimulationTrace& policy,
                           const SimulationTrace& optimal);

/// Performance-difference form of the regret, sum_t |qhat_t - q_t|_Σ^2, for
/// a policy u_t = -K (x_t - r_t) - qhat_t. Exact when Q_T = X.
double regret_via_pdl(const LqtSolution& lqt, std::span<const VectorXd> qhat,
                      std::span<const VectorXd> refs);

/// Disturbances w_t = A r_t - r_{t+1} of the equivalent regulation problem
/// e_{t+1} = A e_t + B u_t + w_t with e_t = x_t - r_t.
std::vector<VectorXd> lqt_to_lqr(const MatrixXd& A,
                                 std::span<const VectorXd> refs);

}  // namespace plot
