#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "plot/controller.hpp"
#include "plot/errors.hpp"

namespace plot {
namespace {

using testing::random_system;
using testing::random_vector;

struct Plant {
  LinearSystem sys;
  LqtSolution lqt;
};

Plant make_plant(std::uint64_t seed, int n, int m, int W) {
  CounterRng rng(seed);
  Plant p;
  p.sys = random_system(rng, n, m);
  p.lqt = compute_gains(p.sys, solve_riccati(p.sys), W);
  return p;
}

ControllerConfig config(ControllerKind kind, int W, int n) {
  ControllerConfig cfg;
  cfg.kind = kind;
  cfg.W = W;
  cfg.gamma = 1.0;
  cfg.eps = 1e-6;
  cfg.M = 100.0;
  cfg.lift = ReferenceLift::identity(n);
  return cfg;
}

TEST(Tuning, Horizon) {
  EXPECT_EQ(tune_horizon(1000, 0.618), 8);
  EXPECT_EQ(tune_horizon(2, 0.01), 1);
  EXPECT_THROW(tune_horizon(1000, 1.0), DomainError);
  EXPECT_THROW(tune_horizon(1, 0.5), DomainError);
}

TEST(Tuning, Gamma) {
  EXPECT_NEAR(tune_gamma(1000, 3.0, 10.0), 0.9913397459621556, 1e-12);
  // Small V_T falls back to log^2 T / T.
  const double l = std::log(1000.0);
  EXPECT_NEAR(tune_gamma(1000, 0.0, 1.0), 1.0 - std::sqrt(l * l / 1000.0 / 4000.0), 1e-12);
  EXPECT_DOUBLE_EQ(tune_gamma(10, 1e6, 1.0), 0.01);
  EXPECT_NEAR(tune_gamma_power(1000, 1.5, 0.5), 0.9525658350974743, 1e-12);
  EXPECT_DOUBLE_EQ(tune_gamma_power(4, 1.5, 0.1), 0.01);
  EXPECT_THROW(tune_gamma_power(10, 1.0, 0.0), DomainError);
}

TEST(Kinds, StringRoundTrip) {
  for (auto k : {ControllerKind::kPlot, ControllerKind::kNaiveRls, ControllerKind::kNaiveLqr,
                 ControllerKind::kOptimalNoncausal}) {
    EXPECT_EQ(controller_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(controller_kind_from_string("mpc"), ConfigError);
}

TEST(NaiveLqr, IsStateFeedbackOnError) {
  const auto p = make_plant(1, 3, 2, 1);
  TrackingController ctl(config(ControllerKind::kNaiveLqr, 1, 3), p.lqt, 5, 3, 1, false);
  CounterRng rng(2);
  for (int t = 0; t < 5; ++t) {
    const VectorXd x = random_vector(rng, 3), r = random_vector(rng, 3);
    const auto step = ctl.step(x, r);
    EXPECT_LT((step.u + p.lqt.K * (x - r)).norm(), 1e-14);
    EXPECT_EQ(step.feedforward.norm(), 0.0);
    EXPECT_TRUE(step.predictions.empty());
  }
  EXPECT_EQ(ctl.bank(), nullptr);
  EXPECT_THROW(ctl.step(VectorXd::Zero(3), VectorXd::Zero(3)), DomainError);
}

TEST(Plot, InputDecomposition) {
  const auto p = make_plant(3, 3, 1, 4);
  TrackingController ctl(config(ControllerKind::kPlot, 4, 3), p.lqt, 20, 3, 1, false);
  CounterRng rng(4);
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = random_vector(rng, 3), r = random_vector(rng, 3);
    const auto step = ctl.step(x, r);
    const VectorXd q = receding_horizon_feedforward(p.lqt, r, step.predictions,
                                                    std::min(4, 20 - t));
    EXPECT_LT((step.feedforward - q).norm(), 1e-12 * (1.0 + q.norm()));
    EXPECT_LT((step.u - (-p.lqt.K * (x - r) - q)).norm(), 1e-12 * (1.0 + step.u.norm()));
  }
}

TEST(Plot, ExactPredictorsReproduceOptimum) {
  // A constant target is predicted exactly by the identity initialization,
  // so with W = T the causal law coincides with the non-causal optimum.
  const int T = 10;
  const auto p = make_plant(5, 3, 2, T);
  CounterRng rng(6);
  const VectorXd r = random_vector(rng, 3);
  const VectorXd x0 = random_vector(rng, 3);
  const std::vector<VectorXd> refs(T + 1, r);
  const auto opt = optimal_noncausal_trace(p.sys, p.lqt, refs, x0);
  TrackingController ctl(config(ControllerKind::kPlot, T, 3), p.lqt, T, 3, 1, false);
  VectorXd x = x0;
  for (int t = 0; t < T; ++t) {
    const auto step = ctl.step(x, r);
    EXPECT_LT((step.u - opt.inputs[t]).norm(), 1e-9 * (1.0 + opt.inputs[t].norm())) << t;
    x = p.sys.A * x + p.sys.B * step.u;
  }
}

TEST(Plot, PredictionsPastHorizonAreZero) {
  const auto p = make_plant(7, 2, 1, 3);
  const int T = 5;
  TrackingController ctl(config(ControllerKind::kPlot, 3, 2), p.lqt, T, 2, 1, false);
  CounterRng rng(8);
  for (int t = 0; t < T; ++t) {
    const auto step = ctl.step(random_vector(rng, 2), random_vector(rng, 2));
    ASSERT_EQ(step.predictions.size(), 3u);
    for (int k = 1; k <= 3; ++k) {
      if (t + k > T) EXPECT_EQ(step.predictions[k - 1].norm(), 0.0) << t << " " << k;
      else EXPECT_GT(step.predictions[k - 1].norm(), 0.0);
    }
  }
}

TEST(NaiveRls, RollsOneStepModelForward) {
  const auto p = make_plant(9, 2, 1, 3);
  auto cfg = config(ControllerKind::kNaiveRls, 3, 2);
  cfg.gamma = 0.9;
  cfg.eps = 0.1;
  TrackingController ctl(cfg, p.lqt, 30, 2, 1, false);
  ASSERT_NE(ctl.bank(), nullptr);
  EXPECT_EQ(ctl.bank()->horizon(), 1);
  CounterRng rng(10);
  for (int t = 0; t < 10; ++t) {
    const VectorXd r = random_vector(rng, 2);
    const auto step = ctl.step(random_vector(rng, 2), r);
    const MatrixXd S = ctl.bank()->learner(1, 0).S_hat;
    VectorXd z = r;
    for (int k = 1; k <= 3; ++k) {
      z = S * z;
      EXPECT_LT((step.predictions[k - 1] - z).norm(), 1e-12 * (1.0 + z.norm()));
    }
  }
}

TEST(Lift, PredictionsAreLiftedIntoPlantCoordinates) {
  const auto p = make_plant(11, 4, 1, 2);
  auto cfg = config(ControllerKind::kPlot, 2, 4);
  cfg.lift = ReferenceLift::leading(4, 2);
  TrackingController ctl(cfg, p.lqt, 6, 2, 1, false);
  const auto step = ctl.step(VectorXd::Zero(4), Eigen::Vector2d(1.0, 2.0));
  for (const auto& r : step.predictions) {
    EXPECT_EQ(r.size(), 4);
    EXPECT_EQ(r.tail(2).norm(), 0.0);
  }
}

TEST(Config, Validation) {
  const auto p = make_plant(12, 2, 1, 2);
  auto cfg = config(ControllerKind::kPlot, 3, 2);
  EXPECT_THROW(TrackingController(cfg, p.lqt, 5, 2, 1, false), DimensionMismatch);
  cfg = config(ControllerKind::kOptimalNoncausal, 1, 2);
  EXPECT_THROW(TrackingController(cfg, p.lqt, 5, 2, 1, false), ConfigError);
  cfg = config(ControllerKind::kPlot, 1, 3);
  EXPECT_THROW(TrackingController(cfg, p.lqt, 5, 3, 1, false), DimensionMismatch);
  cfg = config(ControllerKind::kPlot, 1, 2);
  cfg.gamma = 1.5;
  EXPECT_THROW(TrackingController(cfg, p.lqt, 5, 2, 1, false), DomainError);
}

}  // namespace
}  // namespace plot
