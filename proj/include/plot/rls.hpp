#pragma once

// Multi-step-ahead recursive least squares with exponential forgetting.
//
// The k-step predictor is split into k independent learners updated on
// non-overlapping epochs: at time t, learner (t+1) mod k consumes the pair
// (r_t, z_{t-k}) and then predicts r_{t+k|t} from z_t. Each learner is an
// ordinary one-step RLS on its own subsampled time axis.

#include <deque>
#include <vector>

#include "plot/linalg.hpp"

namespace plot {

enum class ProjectionMode {
  kWeightedBox,         // entries of Ŝ in [-M, M], distance in the P-norm
  kUnweightedSpectral,  // spectral norm <= M, Frobenius distance
  kNone,
};

enum class LearnerInit {
  kIdentity,  // Ŝ = [I | 0]
  kZero,      // Ŝ = 0
};

struct Learner {
  MatrixXd S_hat;  // n_r x d
  MatrixXd P;      // d x d design matrix
  double gamma = 1.0;
  double eps = 1.0;
  double M = 1.0;
  long updates = 0;

  static Learner make(int n_r, int d, double gamma, double eps, double M, LearnerInit init);
};

/// One RLS step with forgetting and projection:
///   P <- γP + zzᵀ + (1-γ)εI,  Ŝ* = Ŝ + (r - Ŝz) zᵀ P⁻¹,  Ŝ <- Π(Ŝ*).
/// The floor term keeps P = εI + Σ γ^{t-s} z_s z_sᵀ, so P never drops below
/// εI and vanishes for γ = 1.
/// P⁻¹ is applied through a Cholesky factorization of P. Throws
/// NumericalBreakdown if P is no longer positive definite.
void rls_update(Learner& lrn, const VectorXd& r, const VectorXd& z, ProjectionMode mode);

/// argmin over the box {|S_ij| <= M} of tr((S - Y) P (S - Y)ᵀ). Rows are
/// independent bound-constrained QPs solved by a primal active-set method.
/// Throws SolverFailure if the KKT residual stays above `kkt_tol`.
MatrixXd project_weighted_box(const MatrixXd& Y, const MatrixXd& P, double M,
                              double kkt_tol = 1e-8);

/// Nearest matrix in Frobenius norm with spectral norm <= M (singular values
/// clipped at M).
MatrixXd project_spectral(const MatrixXd& Y, double M);

/// Projected-gradient KKT residual of a box-constrained row problem, exposed
/// for tests: |s - clamp(s - P(s - y), -M, M)|_inf, maximised over rows.
double box_kkt_residual(const MatrixXd& S, const MatrixXd& Y, const MatrixXd& P, double M);

struct BankConfig {
  int W = 1;
  int n_r = 1;
  int d = 1;  // regressor dimension
  double gamma = 1.0;
  double eps = 1e-4;
  double M = 10.0;
  ProjectionMode projection = ProjectionMode::kWeightedBox;
  LearnerInit init = LearnerInit::kIdentity;
};

class PredictorBank {
 public:
  explicit PredictorBank(const BankConfig& cfg);

  /// Feeds (r_t, z_t) for t = time(), updates the W scheduled learners and
  /// returns r_{t+k|t} for k = 1..W. The k-step learners start training at
  /// t = k, the first step whose lagged regressor z_{t-k} was observed.
  std::vector<VectorXd> observe(const VectorXd& r_t, const VectorXd& z_t);

  int time() const { return t_; }
  int horizon() const { return cfg_.W; }
  const BankConfig& config() const { return cfg_; }

  /// Learner i of the k-step predictor (1 <= k <= W, 0 <= i < k).
  const Learner& learner(int k, int i) const { return learners_.at(k - 1).at(i); }
  Learner& learner(int k, int i) { return learners_.at(k - 1).at(i); }

  static int scheduled_learner(int k, int t) { return (t + 1) % k; }

  /// Squared k-step losses |r_t - Ŝ_{t|t-k} z_{t-k}|², one per t >= k.
  const std::vector<double>& losses(int k) const { return losses_.at(k - 1); }

  /// Largest spectral norm of any design matrix after any update so far.
  double max_design_norm() const { return max_design_norm_; }

  int learner_count() const;

 private:
  const VectorXd& regressor_at(int t) const;

  BankConfig cfg_;
  std::vector<std::vector<Learner>> learners_;
  std::vector<std::vector<double>> losses_;
  std::deque<VectorXd> history_;  // z_{t-W}..z_{t-1}
  int t_ = 0;
  double max_design_norm_ = 0.0;
};

/// Sum of recorded k-step losses (realizable comparator, nothing subtracted).
double prediction_regret(const PredictorBank& bank, int k);

}  // namespace plot
