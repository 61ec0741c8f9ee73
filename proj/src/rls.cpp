#include "plot/rls.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <fmt/format.h>

#include "plot/errors.hpp"

namespace plot {

Learner Learner::make(int n_r, int d, double gamma, double eps, double M, LearnerInit init) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("forgetting factor must lie in (0,1]");
  if (!(eps > 0.0)) throw DomainError("initial regularization must be positive");
  if (!(M > 0.0)) throw DomainError("projection radius must be positive");
  Learner l;
  l.S_hat = MatrixXd::Zero(n_r, d);
  if (init == LearnerInit::kIdentity) {
    const int k = std::min(n_r, d);
    l.S_hat.leftCols(k).setIdentity();
  }
  l.P = eps * MatrixXd::Identity(d, d);
  l.gamma = gamma;
  l.eps = eps;
  l.M = M;
  return l;
}

void rls_update(Learner& lrn, const VectorXd& r, const VectorXd& z, ProjectionMode mode) {
  if (z.size() != lrn.P.rows() || r.size() != lrn.S_hat.rows()) {
    throw DimensionMismatch("rls_update: regressor or target has wrong size");
  }
  // The (1-γ)ε term keeps λ_min(P) >= ε in directions the data never excites;
  // without it those directions decay like εγ^t and the factorization fails.
  lrn.P = lrn.gamma * lrn.P + z * z.transpose();
  lrn.P.diagonal().array() += (1.0 - lrn.gamma) * lrn.eps;
  lrn.P = 0.5 * (lrn.P + lrn.P.transpose());
  Eigen::LLT<MatrixXd> llt(lrn.P);
  if (llt.info() != Eigen::Success) {
    throw NumericalBreakdown("design matrix lost positive definiteness");
  }
  const VectorXd gain = llt.solve(z);  // P⁻¹ z
  const VectorXd err = r - lrn.S_hat * z;
  MatrixXd S_star = lrn.S_hat + err * gain.transpose();
  switch (mode) {
    case ProjectionMode::kWeightedBox:
      lrn.S_hat = project_weighted_box(S_star, lrn.P, lrn.M);
      break;
    case ProjectionMode::kUnweightedSpectral:
      lrn.S_hat = project_spectral(S_star, lrn.M);
      break;
    case ProjectionMode::kNone:
      lrn.S_hat = std::move(S_star);
      break;
  }
  ++lrn.updates;
}

namespace {

// Primal active-set method for  min (s - y)ᵀ P (s - y)  s.t. -M <= s <= M.
// `bound` holds 0 for free variables, -1 / +1 for variables fixed at -M / +M.
VectorXd solve_box_row(const VectorXd& y, const MatrixXd& P, double M) {
  const int d = static_cast<int>(y.size());
  VectorXd s = y.cwiseMax(-M).cwiseMin(M);
  std::vector<int> bound(d, 0);
  for (int i = 0; i < d; ++i) {
    if (y(i) > M) bound[i] = 1;
    else if (y(i) < -M) bound[i] = -1;
  }

  const int max_iter = 20 * d + 20;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> free_idx, fixed_idx;
    for (int i = 0; i < d; ++i) (bound[i] == 0 ? free_idx : fixed_idx).push_back(i);

    // Minimizer over the free block with fixed variables held in place:
    //   P_FF (s_F - y_F) = -P_FB (s_B - y_B).
    VectorXd target = s;
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      MatrixXd Pff(nf, nf);
      VectorXd rhs = VectorXd::Zero(nf);
      for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) Pff(a, b) = P(free_idx[a], free_idx[b]);
        for (int j : fixed_idx) rhs(a) -= P(free_idx[a], j) * (s(j) - y(j));
      }
      const VectorXd delta = Pff.ldlt().solve(rhs);
      for (int a = 0; a < nf; ++a) target(free_idx[a]) = y(free_idx[a]) + delta(a);
    }

    // Longest feasible step toward the free-block minimizer.
    double alpha = 1.0;
    int blocking = -1;
    for (int i : free_idx) {
      const double step = target(i) - s(i);
      if (step > 0.0 && target(i) > M) {
        const double a = (M - s(i)) / step;
        if (a < alpha) alpha = a, blocking = i;
      } else if (step < 0.0 && target(i) < -M) {
        const double a = (-M - s(i)) / step;
        if (a < alpha) alpha = a, blocking = i;
      }
    }
    for (int i : free_idx) s(i) += alpha * (target(i) - s(i));
    if (blocking >= 0) {
      s(blocking) = s(blocking) > 0.0 ? M : -M;
      bound[blocking] = s(blocking) > 0.0 ? 1 : -1;
      continue;
    }

    // Free block is optimal; release the most violated bound, if any.
    const VectorXd grad = P * (s - y);
    int release = -1;
    double worst = 0.0;
    for (int i : fixed_idx) {
      // Fixed at +M needs grad <= 0, fixed at -M needs grad >= 0.
      const double violation = bound[i] > 0 ? grad(i) : -grad(i);
      if (violation > worst) worst = violation, release = i;
    }
    if (release < 0) return s;
    bound[release] = 0;
  }
  throw SolverFailure("box projection active set did not terminate");
}

}  // namespace

MatrixXd project_weighted_box(const MatrixXd& Y, const MatrixXd& P, double M, double kkt_tol) {
  if (P.rows() != Y.cols() || P.cols() != Y.cols()) {
    throw DimensionMismatch("projection weight must be d x d");
  }
  if (Y.cwiseAbs().maxCoeff() <= M) return Y;
  MatrixXd S(Y.rows(), Y.cols());
  for (int i = 0; i < Y.rows(); ++i) {
    const VectorXd y = Y.row(i).transpose();
    if (y.cwiseAbs().maxCoeff() <= M) {
      S.row(i) = y.transpose();
    } else {
      S.row(i) = solve_box_row(y, P, M).transpose();
    }
  }
  const double scale = 1.0 + P.cwiseAbs().maxCoeff() * (1.0 + Y.cwiseAbs().maxCoeff());
  const double kkt = box_kkt_residual(S, Y, P, M);
  if (!(kkt <= kkt_tol * scale)) {
    throw SolverFailure(fmt::format("box projection KKT residual {:.3e}", kkt));
  }
  return S;
}

double box_kkt_residual(const MatrixXd& S, const MatrixXd& Y, const MatrixXd& P, double M) {
  const MatrixXd grad = (S - Y) * P;  // rows are Pᵀ(s - y) = P(s - y)
  const MatrixXd stepped = (S - grad).cwiseMax(-M).cwiseMin(M);
  return (S - stepped).cwiseAbs().maxCoeff();
}

MatrixXd project_spectral(const MatrixXd& Y, double M) {
  Eigen::JacobiSVD<MatrixXd> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= M) return Y;
  return svd.matrixU() * sv.cwiseMin(M).asDiagonal() * svd.matrixV().transpose();
}

PredictorBank::PredictorBank(const BankConfig& cfg) : cfg_(cfg) {
  if (cfg_.W < 1) throw DomainError("prediction horizon must be at least 1");
  learners_.resize(cfg_.W);
  losses_.resize(cfg_.W);
  for (int k = 1; k <= cfg_.W; ++k) {
    for (int i = 0; i < k; ++i) {
      learners_[k - 1].push_back(
          Learner::make(cfg_.n_r, cfg_.d, cfg_.gamma, cfg_.eps, cfg_.M, cfg_.init));
    }
  }
}

int PredictorBank::learner_count() const {
  int total = 0;
  for (const auto& row : learners_) total += static_cast<int>(row.size());
  return total;
}

const VectorXd& PredictorBank::regressor_at(int t) const {
  // history_ holds z_{t_-h}..z_{t_-1} with h = history_.size().
  const int h = static_cast<int>(history_.size());
  const int offset = t - (t_ - h);
  return history_[offset];
}

std::vector<VectorXd> PredictorBank::observe(const VectorXd& r_t, const VectorXd& z_t) {
  if (r_t.size() != cfg_.n_r || z_t.size() != cfg_.d) {
    throw DimensionMismatch("observe: target or regressor has wrong size");
  }
  const int t = t_;
  std::vector<VectorXd> predictions;
  predictions.reserve(cfg_.W);
  for (int k = 1; k <= cfg_.W; ++k) {
    Learner& lrn = learners_[k - 1][scheduled_learner(k, t)];
    // Pairs whose regressor predates the first observation would be made up
    // from padding, so learner k first trains at t = k.
    if (t >= k) {
      const VectorXd& z_old = regressor_at(t - k);
      losses_[k - 1].push_back((r_t - lrn.S_hat * z_old).squaredNorm());
      rls_update(lrn, r_t, z_old, cfg_.projection);
      max_design_norm_ = std::max(max_design_norm_, spectral_norm(lrn.P));
    }
    predictions.push_back(lrn.S_hat * z_t);
  }
  history_.push_back(z_t);
  if (static_cast<int>(history_.size()) > cfg_.W) history_.pop_front();
  ++t_;
  return predictions;
}

double prediction_regret(const PredictorBank& bank, int k) {
  double total = 0.0;
  for (double l : bank.losses(k)) total += l;
  return total;
}

}  // namespace plot
