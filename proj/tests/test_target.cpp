#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "plot/errors.hpp"
#include "plot/target.hpp"

namespace plot {
namespace {

using testing::random_vector;

TEST(Circle, Entries) {
  const double th = 0.06, Ts = 0.1;
  const auto S = make_circle(th, Ts);
  EXPECT_DOUBLE_EQ(S(0, 2), Ts);
  EXPECT_DOUBLE_EQ(S(1, 3), Ts);
  EXPECT_DOUBLE_EQ(S(2, 2), std::cos(th));
  EXPECT_DOUBLE_EQ(S(2, 3), -std::sin(th));
  EXPECT_DOUBLE_EQ(S(3, 2), std::sin(th));
  EXPECT_DOUBLE_EQ(S(0, 1), 0.0);
  EXPECT_TRUE(make_circle(0.0, Ts).bottomRightCorner(2, 2).isIdentity());
}

TEST(Circle, SpeedIsInvariant) {
  const auto S = make_circle(0.06, 0.1);
  Eigen::Vector4d r(1.0, 0.0, 0.3, -0.4);
  for (int t = 0; t < 200; ++t) {
    r = S * r;
    EXPECT_NEAR(r.tail<2>().norm(), 0.5, 1e-12);
  }
}

TEST(Circle, InitialStateStaysOnCentredCircle) {
  const double th = 0.06, Ts = 0.1;
  const auto sched = planar_to_spatial(std::vector<MatrixXd>(401, make_circle(th, Ts)));
  TargetProcess proc(sched, circle_initial_state(th, Ts, 2.0, 0.5), 10.0);
  for (const auto& r : proc.rollout()) {
    EXPECT_NEAR(r.head(2).norm(), 2.0, 1e-9);
    EXPECT_NEAR(r(2), 0.5, 1e-12);
  }
}

TEST(Benchmark, FirstSwitch) {
  const int T = 100;  // switch every 10 steps
  ASSERT_EQ(switch_period(T), 10);
  const auto S = make_benchmark_dynamic(T, 0.1);
  ASSERT_EQ(S.size(), 101u);
  EXPECT_TRUE(S[9].isApprox(make_circle(0.06, 0.1)));
  MatrixXd expect = make_circle(-0.0594, 0.1);
  expect.bottomRightCorner(2, 2) *= -1.0;
  EXPECT_LT((S[10] - expect).norm(), 1e-15);
  MatrixXd third = make_circle(0.06 * 0.99 * 0.99, 0.1);
  EXPECT_LT((S[20] - third).norm(), 1e-15);
}

TEST(Benchmark, SwitchCount) {
  for (int T : {100, 2000, 3000}) {
    const auto S = make_benchmark_dynamic(T, 0.1);
    int switches = 0;
    for (int t = 1; t <= T; ++t) switches += (S[t] - S[t - 1]).norm() > 0.0;
    EXPECT_EQ(switches, T / switch_period(T)) << T;
  }
}

TEST(Spiral, DeterministicAndSeeded) {
  const auto a = make_sqrtT_spiral(400, 7);
  const auto b = make_sqrtT_spiral(400, 7);
  const auto c = make_sqrtT_spiral(400, 8);
  ASSERT_EQ(a.S.size(), 401u);
  for (std::size_t t = 0; t < a.S.size(); ++t) EXPECT_EQ(a.S[t], b.S[t]);
  EXPECT_NE(a.factors, c.factors);
  EXPECT_EQ(a.switch_steps.size(), 400u / 20u);  // t = 20, 40, ..., 400
  for (double f : a.factors) {
    EXPECT_GE(f, 0.7);
    EXPECT_LT(f, 1.5);
  }
}

TEST(Spiral, SwitchSteps) {
  const auto sp = make_sqrtT_spiral(400, 1);
  for (std::size_t i = 0; i < sp.switch_steps.size(); ++i) {
    const int t = sp.switch_steps[i];
    EXPECT_EQ(t % 20, 0);
    const double prev = i == 0 ? 1.0 : sp.factors[i - 1];
    EXPECT_NEAR(sp.S[t](2, 2), std::cos(0.06) * sp.factors[i] / prev, 1e-14);
    EXPECT_DOUBLE_EQ(sp.S[t](0, 4), -0.1);
    EXPECT_DOUBLE_EQ(sp.S[t](1, 4), 0.1);
    if (t < 400) {
      EXPECT_EQ(sp.S[t + 1](0, 4), 0.0);
    }
  }
  double V = 0.0;
  for (int t = 0; t < 400; ++t) V += (sp.S[t + 1] - sp.S[t]).norm();
  EXPECT_DOUBLE_EQ(sp.V_T, V);
}

TEST(Spiral, RadiusStaysBounded) {
  const auto sp = make_sqrtT_spiral(3000, 2);
  const auto sched = planar_to_spatial(sp.S);
  TargetProcess proc(sched, circle_initial_state(0.06, 0.1), 1e9);
  double worst = 0.0;
  for (const auto& r : proc.rollout()) worst = std::max(worst, r.head(2).norm());
  EXPECT_LT(worst, 10.0);
}

TEST(Spiral, NoSwitchesForShortHorizons) {
  for (int T : {1, 2, 3}) {
    const auto sp = make_sqrtT_spiral(T, 0);
    EXPECT_TRUE(sp.switch_steps.empty());
    EXPECT_EQ(sp.V_T, 0.0);
  }
}

TEST(Uniform, BoundsMeanAndDeterminism) {
  UniformTargetSampler a(5), b(5);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const VectorXd r = a.next();
    ASSERT_EQ(r, b.next());
    EXPECT_LE(r.cwiseAbs().maxCoeff(), 1.0);
    mean += r;
  }
  EXPECT_LT((mean / N).norm(), 0.02);
}

TEST(Uniform, ScheduleReproducesSamples) {
  auto [sched, r0] = make_uniform_random(50, 3);
  UniformTargetSampler s(3);
  EXPECT_EQ(r0, s.next());
  TargetProcess proc(sched, r0, 2.0);
  const auto rs = proc.rollout();
  for (int t = 1; t <= 50; ++t) EXPECT_EQ(rs[t], s.next());
  EXPECT_EQ(proc.bound_violations(), 0);
}

TEST(Regressor, ShiftsAndPads) {
  RegressorBuffer buf(2, 3, true);
  buf.reset(Eigen::Vector2d(1, 2));
  VectorXd expect(7);
  expect << 1, 2, 1, 2, 1, 2, 1;
  EXPECT_EQ(buf.z(), expect);
  buf.push(Eigen::Vector2d(3, 4));
  expect << 3, 4, 1, 2, 1, 2, 1;
  EXPECT_EQ(buf.z(), expect);
  EXPECT_THROW(buf.push(Eigen::Vector3d::Zero()), DimensionMismatch);
}

TEST(MultiStep, MatchesRolloutForFixedSchedule) {
  CounterRng rng(1);
  const auto sched = make_random_schedule(2, 2, 30, 0.9, 7, 4);
  const VectorXd r0 = random_vector(rng, 2);
  TargetProcess proc(sched, r0, 1e9);
  std::vector<VectorXd> rs{r0}, zs{proc.regressor()};
  for (int t = 1; t <= 30; ++t) {
    rs.push_back(proc.step());
    zs.push_back(proc.regressor());
  }
  for (int t = 0; t + 4 <= 30; ++t) {
    const MatrixXd S = multi_step_matrix(sched, t, 4);
    EXPECT_LT((S * zs[t] - rs[t + 4]).norm(), 1e-12 * (1.0 + rs[t + 4].norm())) << t;
  }
}

TEST(MultiStep, MatchesRolloutOnRandomSchedules) {
  CounterRng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const int n_r = 1 + rep % 3, p = 1 + rep % 3, k = 1 + rep % 5;
    const auto sched = make_random_schedule(n_r, p, 12, 1.0, 1 + rep % 4, rep);
    const VectorXd r0 = random_vector(rng, n_r);
    TargetProcess proc(sched, r0, 1e9);
    std::vector<VectorXd> rs{r0}, zs{proc.regressor()};
    for (int t = 1; t <= 12; ++t) {
      rs.push_back(proc.step());
      zs.push_back(proc.regressor());
    }
    for (int t = 0; t + k <= 12; ++t) {
      const VectorXd pred = multi_step_matrix(sched, t, k) * zs[t];
      ASSERT_LT((pred - rs[t + k]).norm(), 1e-10 * (1.0 + rs[t + k].norm()))
          << "rep " << rep << " t " << t;
    }
  }
}

TEST(MultiStep, SpanOverloadAgrees) {
  const auto sched = make_random_schedule(2, 2, 10, 1.0, 3, 9);
  const std::vector<MatrixXd> steps(sched.S.begin() + 3, sched.S.begin() + 7);
  EXPECT_EQ(multi_step_matrix(steps, 2, 2, false), multi_step_matrix(sched, 2, 4));
}

TEST(MultiStep, NormBoundedByMaxMultistepNorm) {
  // Any k-step matrix built from the schedule is bounded by the reported max.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sched = make_random_schedule(2, 2, 40, 0.8, 5, seed);
    const double Mk = max_multistep_norm(sched, 6);
    for (int t = 0; t + 6 <= 40; ++t) {
      for (int k = 1; k <= 6; ++k) {
        EXPECT_LE(spectral_norm(multi_step_matrix(sched, t, k)), Mk + 1e-12);
      }
    }
  }
}

TEST(RandomSchedule, RespectsSpectralBall) {
  const auto sched = make_random_schedule(3, 2, 50, 0.7, 4, 1);
  for (const auto& S : sched.S) EXPECT_LE(spectral_norm(S), 0.7 + 1e-12);
}

TEST(PathLength, HandComputed) {
  const std::vector<VectorXd> rs = {Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4),
                                    Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 5)};
  EXPECT_DOUBLE_EQ(path_length_L(rs), 6.0);
  TargetSchedule sched;
  sched.n_r = 1;
  sched.S = {MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 0.5),
             MatrixXd::Constant(1, 1, -0.5)};
  EXPECT_DOUBLE_EQ(path_length_V(sched), 1.0);
}

TEST(PathLength, ConstantScheduleHasZeroVk) {
  TargetSchedule sched;
  sched.n_r = 2;
  sched.S.assign(21, MatrixXd::Identity(2, 2) * 0.9);
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(path_length_Vk(sched, k), 0.0);
}

TEST(Lift, LeadingAndIdentity) {
  const auto L = ReferenceLift::leading(9, 6);
  L.validate();
  VectorXd r(6);
  r << 1, 2, 3, 4, 5, 6;
  const VectorXd x = L.lift(r);
  EXPECT_EQ(x.head(6), r);
  EXPECT_EQ(x.tail(3).norm(), 0.0);
  EXPECT_DOUBLE_EQ(x.norm(), r.norm());
  ReferenceLift::identity(4).validate();
  EXPECT_THROW(ReferenceLift::leading(2, 3), DimensionMismatch);
  ReferenceLift bad{MatrixXd::Ones(3, 2)};
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Spatial, LiftsPlanarCircle) {
  const auto planar = make_circle(0.06, 0.1);
  const auto sched = planar_to_spatial(std::vector<MatrixXd>{planar});
  ASSERT_EQ(sched.n_r, 6);
  ASSERT_EQ(sched.regressor_dim(), 7);
  EXPECT_DOUBLE_EQ(sched.S[0](3, 4), planar(2, 3));
  EXPECT_DOUBLE_EQ(sched.S[0](0, 3), 0.1);
  EXPECT_DOUBLE_EQ(sched.S[0](2, 5), 0.1);
  EXPECT_THROW(planar_to_spatial(std::vector<MatrixXd>{MatrixXd::Zero(3, 3)}), DimensionMismatch);
}

}  // namespace
}  // namespace plot
