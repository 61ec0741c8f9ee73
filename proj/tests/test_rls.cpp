#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "plot/errors.hpp"
#include "plot/rls.hpp"
#include "plot/target.hpp"

namespace plot {
namespace {

using testing::random_matrix;
using testing::random_spd;
using testing::random_vector;

double box_objective(const MatrixXd& S, const MatrixXd& Y, const MatrixXd& P) {
  const MatrixXd D = S - Y;
  return (D * P * D.transpose()).trace();
}

TEST(Learner, InitShapes) {
  const auto a = Learner::make(2, 5, 0.9, 0.1, 3.0, LearnerInit::kIdentity);
  EXPECT_TRUE(a.S_hat.leftCols(2).isIdentity());
  EXPECT_EQ(a.S_hat.rightCols(3).norm(), 0.0);
  EXPECT_TRUE(a.P.isApprox(0.1 * MatrixXd::Identity(5, 5)));
  const auto b = Learner::make(2, 5, 0.9, 0.1, 3.0, LearnerInit::kZero);
  EXPECT_EQ(b.S_hat.norm(), 0.0);
  EXPECT_THROW(Learner::make(2, 5, 0.0, 0.1, 3.0, LearnerInit::kZero), DomainError);
  EXPECT_THROW(Learner::make(2, 5, 0.9, 0.0, 3.0, LearnerInit::kZero), DomainError);
  EXPECT_THROW(Learner::make(2, 5, 0.9, 0.1, -1.0, LearnerInit::kZero), DomainError);
}

TEST(RlsUpdate, FirstStepClosedForm) {
  auto lrn = Learner::make(1, 2, 0.5, 2.0, 100.0, LearnerInit::kZero);
  const Eigen::Vector2d z(1.0, 2.0);
  const VectorXd r = VectorXd::Constant(1, 3.0);
  rls_update(lrn, r, z, ProjectionMode::kNone);
  // P = 0.5*2 I + zzᵀ + 0.5*2 I = 2I + zzᵀ; Ŝ = r zᵀ P⁻¹ = r zᵀ / (2 + |z|²).
  MatrixXd P = 2.0 * MatrixXd::Identity(2, 2) + z * z.transpose();
  EXPECT_TRUE(lrn.P.isApprox(P, 1e-14));
  EXPECT_NEAR(lrn.S_hat(0, 0), 3.0 * 1.0 / 7.0, 1e-14);
  EXPECT_NEAR(lrn.S_hat(0, 1), 3.0 * 2.0 / 7.0, 1e-14);
  EXPECT_EQ(lrn.updates, 1);
}

TEST(RlsUpdate, MatchesBatchRegularizedLeastSquares) {
  CounterRng rng(3);
  const int n_r = 2, d = 4, N = 60;
  auto lrn = Learner::make(n_r, d, 1.0, 1e-8, 1.0, LearnerInit::kIdentity);
  const MatrixXd S0 = lrn.S_hat;
  MatrixXd Rz = MatrixXd::Zero(n_r, d), Zz = MatrixXd::Zero(d, d);
  for (int i = 0; i < N; ++i) {
    const VectorXd z = random_vector(rng, d);
    const VectorXd r = random_vector(rng, n_r);
    rls_update(lrn, r, z, ProjectionMode::kNone);
    Rz += r * z.transpose();
    Zz += z * z.transpose();
  }
  const MatrixXd G = Zz + 1e-8 * MatrixXd::Identity(d, d);
  const MatrixXd oracle = (Rz + 1e-8 * S0) * G.inverse();
  EXPECT_LT((lrn.S_hat - oracle).norm(), 1e-9);
  EXPECT_LT((lrn.P - G).norm(), 1e-9);
}

TEST(RlsUpdate, ForgettingMatchesNormalEquations) {
  // With forgetting the floor (1-γ)εI acts as a ridge toward the previous
  // estimate, so the estimate solves
  //   S_t P_t = γ S_{t-1} P_{t-1} + (1-γ)ε S_{t-1} + r_t z_tᵀ,
  //   P_t = εI + Σ_s γ^{t-s} z_s z_sᵀ.
  CounterRng rng(4);
  const int d = 3, N = 40;
  const double g = 0.9, eps = 0.5;
  auto lrn = Learner::make(1, d, g, eps, 1.0, LearnerInit::kZero);
  MatrixXd P = eps * MatrixXd::Identity(d, d);
  MatrixXd S = MatrixXd::Zero(1, d);
  MatrixXd G = S * P;
  for (int i = 0; i < N; ++i) {
    const VectorXd z = random_vector(rng, d);
    const VectorXd r = random_vector(rng, 1);
    rls_update(lrn, r, z, ProjectionMode::kNone);
    G = g * G + (1.0 - g) * eps * S + r * z.transpose();
    P = g * P + z * z.transpose();
    P.diagonal().array() += (1.0 - g) * eps;
    S = G * P.inverse();
  }
  MatrixXd Pdirect = eps * MatrixXd::Identity(d, d);
  CounterRng again(4);
  for (int i = 0; i < N; ++i) {
    const VectorXd z = random_vector(again, d);
    random_vector(again, 1);
    Pdirect += std::pow(g, N - 1 - i) * z * z.transpose();
  }
  EXPECT_LT((lrn.P - Pdirect).norm(), 1e-10 * Pdirect.norm());
  EXPECT_LT((lrn.S_hat - S).norm(), 1e-9);
}

TEST(RlsUpdate, ZeroRegressorOnlyShrinksDesign) {
  auto lrn = Learner::make(2, 3, 0.8, 1.0, 5.0, LearnerInit::kIdentity);
  const MatrixXd before = lrn.S_hat;
  rls_update(lrn, Eigen::Vector2d(4, 5), VectorXd::Zero(3), ProjectionMode::kWeightedBox);
  EXPECT_EQ(lrn.S_hat, before);
  EXPECT_TRUE(lrn.P.isApprox(MatrixXd::Identity(3, 3)));
}

TEST(RlsUpdate, DesignStaysAboveFloor) {
  CounterRng rng(5);
  auto lrn = Learner::make(1, 3, 0.5, 0.01, 5.0, LearnerInit::kZero);
  VectorXd z = VectorXd::Zero(3);
  for (int i = 0; i < 500; ++i) {
    z(0) = rng.normal();  // only one direction is ever excited
    rls_update(lrn, VectorXd::Constant(1, z(0)), z, ProjectionMode::kWeightedBox);
    ASSERT_GE(min_eigenvalue_sym(lrn.P), 0.01 - 1e-12);
  }
  EXPECT_NEAR(lrn.S_hat(0, 0), 1.0, 1e-6);
}

TEST(RlsUpdate, RejectsWrongSizes) {
  auto lrn = Learner::make(2, 3, 0.9, 1.0, 1.0, LearnerInit::kZero);
  EXPECT_THROW(rls_update(lrn, VectorXd::Zero(2), VectorXd::Zero(4), ProjectionMode::kNone),
               DimensionMismatch);
}

TEST(BoxProjection, InteriorIsUnchanged) {
  CounterRng rng(6);
  const MatrixXd Y = random_matrix(rng, 3, 4, 0.2);
  const MatrixXd P = random_spd(rng, 4);
  EXPECT_EQ(project_weighted_box(Y, P, 1.0), Y);
}

TEST(BoxProjection, DiagonalWeightIsClamp) {
  CounterRng rng(7);
  const MatrixXd Y = random_matrix(rng, 3, 5, 3.0);
  VectorXd w(5);
  w << 0.5, 1, 2, 3, 4;
  const MatrixXd P = w.asDiagonal();
  const MatrixXd S = project_weighted_box(Y, P, 1.0);
  EXPECT_LT((S - Y.cwiseMax(-1.0).cwiseMin(1.0)).norm(), 1e-12);
}

TEST(BoxProjection, MatchesGridSearchIn2d) {
  CounterRng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const MatrixXd Y = random_matrix(rng, 1, 2, 3.0);
    MatrixXd P = random_spd(rng, 2);
    P(0, 1) = P(1, 0) = 0.9 * std::sqrt(P(0, 0) * P(1, 1)) * (rep % 2 ? 1 : -1);
    const MatrixXd S = project_weighted_box(Y, P, 1.0);
    double best = 1e300;
    MatrixXd arg(1, 2);
    const int N = 2000;
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j <= N; ++j) {
        MatrixXd c(1, 2);
        c << -1.0 + 2.0 * i / N, -1.0 + 2.0 * j / N;
        const double f = box_objective(c, Y, P);
        if (f < best) {
          best = f;
          arg = c;
        }
      }
    }
    EXPECT_LE(box_objective(S, Y, P), best + 1e-12) << rep;
    EXPECT_LT((S - arg).cwiseAbs().maxCoeff(), 1e-3) << rep;
  }
}

TEST(BoxProjection, KktAndFeasibility) {
  CounterRng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 + rep % 7;
    const MatrixXd Y = random_matrix(rng, 3, d, 4.0);
    const MatrixXd P = random_spd(rng, d, 1e-3);
    const MatrixXd S = project_weighted_box(Y, P, 1.5);
    EXPECT_LE(S.cwiseAbs().maxCoeff(), 1.5 + 1e-12);
    EXPECT_LT(box_kkt_residual(S, Y, P, 1.5), 1e-8 * (1.0 + P.cwiseAbs().maxCoeff() * 5.0));
  }
}

TEST(BoxProjection, NonExpansiveInPNorm) {
  CounterRng rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd P = random_spd(rng, 4);
    const MatrixXd Y1 = random_matrix(rng, 2, 4, 3.0);
    const MatrixXd Y2 = random_matrix(rng, 2, 4, 3.0);
    const MatrixXd S1 = project_weighted_box(Y1, P, 1.0);
    const MatrixXd S2 = project_weighted_box(Y2, P, 1.0);
    EXPECT_LE(box_objective(S1, S2, P), box_objective(Y1, Y2, P) + 1e-10);
  }
}

TEST(SpectralProjection, ClipsSingularValues) {
  CounterRng rng(11);
  const MatrixXd Y = random_matrix(rng, 3, 5, 2.0);
  const MatrixXd S = project_spectral(Y, 1.0);
  EXPECT_NEAR(spectral_norm(S), 1.0, 1e-12);
  const MatrixXd small = Y / (2.0 * spectral_norm(Y));
  EXPECT_LT((project_spectral(small, 1.0) - small).norm(), 1e-14);
}

TEST(SpectralProjection, NoFeasibleCandidateIsCloser) {
  CounterRng rng(12);
  const MatrixXd Y = random_matrix(rng, 3, 4, 2.0);
  const MatrixXd S = project_spectral(Y, 1.0);
  const double d0 = (S - Y).norm();
  for (int i = 0; i < 1000; ++i) {
    MatrixXd C = S + random_matrix(rng, 3, 4, 0.3);
    C /= std::max(1.0, spectral_norm(C));
    EXPECT_GE((C - Y).norm(), d0 - 1e-12);
  }
}

TEST(Bank, LearnerCountAndSchedule) {
  BankConfig cfg;
  cfg.W = 4;
  cfg.n_r = 2;
  cfg.d = 2;
  PredictorBank bank(cfg);
  EXPECT_EQ(bank.learner_count(), 10);
  EXPECT_EQ(PredictorBank::scheduled_learner(3, 0), 1);
  EXPECT_EQ(PredictorBank::scheduled_learner(3, 1), 2);
  EXPECT_EQ(PredictorBank::scheduled_learner(3, 2), 0);
  EXPECT_EQ(PredictorBank::scheduled_learner(1, 17), 0);
}

TEST(Bank, EachLearnerSeesItsOwnEpochs) {
  BankConfig cfg;
  cfg.W = 3;
  cfg.n_r = 1;
  cfg.d = 1;
  cfg.gamma = 1.0;
  PredictorBank bank(cfg);
  for (int t = 0; t < 12; ++t) bank.observe(VectorXd::Constant(1, t), VectorXd::Constant(1, t));
  // k-step learners update once per step from t = k-1 on, round robin.
  // k-step learners train from t = k on, round robin over (t+1) mod k.
  EXPECT_EQ(bank.learner(1, 0).updates, 11);
  EXPECT_EQ(bank.learner(3, 0).updates, 3);  // t = 5, 8, 11
  EXPECT_EQ(bank.learner(3, 1).updates, 3);  // t = 3, 6, 9
  EXPECT_EQ(bank.learner(3, 2).updates, 3);  // t = 4, 7, 10
  EXPECT_EQ(bank.losses(3).size(), 9u);
}

TEST(Bank, LearnsStaticCircle) {
  const double th = 0.06, Ts = 0.1;
  const auto sched = planar_to_spatial(std::vector<MatrixXd>(401, make_circle(th, Ts)));
  TargetProcess proc(sched, circle_initial_state(th, Ts), 10.0);
  const auto rs = proc.rollout();
  BankConfig cfg;
  cfg.W = 5;
  cfg.n_r = 6;
  cfg.d = 7;
  cfg.gamma = 1.0;
  cfg.eps = 1e-6;
  cfg.M = 10.0;
  PredictorBank bank(cfg);
  RegressorBuffer buf(6, 1, true);
  double worst = 0.0;
  for (int t = 0; t + 5 <= 400; ++t) {
    if (t == 0) buf.reset(rs[0]);
    else buf.push(rs[t]);
    const auto preds = bank.observe(rs[t], buf.z());
    if (t >= 200) {
      for (int k = 1; k <= 5; ++k) worst = std::max(worst, (preds[k - 1] - rs[t + k]).norm());
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Bank, PerfectInitHasZeroLoss) {
  const auto sched = make_random_schedule(2, 1, 50, 0.9, 1000, 3);
  const VectorXd r0 = Eigen::Vector2d(0.5, -0.2);
  TargetProcess proc(sched, r0, 10.0);
  const auto rs = proc.rollout();
  BankConfig cfg;
  cfg.W = 1;
  cfg.n_r = 2;
  cfg.d = 2;
  cfg.gamma = 0.9;
  cfg.projection = ProjectionMode::kNone;
  PredictorBank bank(cfg);
  bank.learner(1, 0).S_hat = sched.S[1];
  RegressorBuffer buf(2, 1, false);
  for (int t = 0; t <= 50; ++t) {
    if (t == 0) buf.reset(rs[0]);
    else buf.push(rs[t]);
    bank.observe(rs[t], buf.z());
  }
  EXPECT_LT(prediction_regret(bank, 1), 1e-24);
}

TEST(Bank, DesignNormBound) {
  CounterRng rng(14);
  BankConfig cfg;
  cfg.W = 4;
  cfg.n_r = 2;
  cfg.d = 3;
  cfg.gamma = 0.7;
  cfg.eps = 0.3;
  PredictorBank bank(cfg);
  double sup = 0.0;
  for (int t = 0; t < 300; ++t) {
    VectorXd z = random_vector(rng, 3);
    sup = std::max(sup, z.squaredNorm());
    bank.observe(random_vector(rng, 2), z);
  }
  EXPECT_LE(bank.max_design_norm(), cfg.eps + sup / (1.0 - cfg.gamma));
}

TEST(Bank, RejectsBadInput) {
  BankConfig cfg;
  cfg.W = 0;
  EXPECT_THROW(PredictorBank{cfg}, DomainError);
  cfg.W = 1;
  cfg.n_r = 2;
  cfg.d = 2;
  PredictorBank bank(cfg);
  EXPECT_THROW(bank.observe(VectorXd::Zero(3), VectorXd::Zero(2)), DimensionMismatch);
}

}  // namespace
}  // namespace plot
