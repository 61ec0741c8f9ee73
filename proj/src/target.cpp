#include "plot/target.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fmt/format.h>

#include "plot/errors.hpp"
#include "plot/rng.hpp"

namespace plot {

void TargetSchedule::validate() const {
  if (p < 1 || n_r < 1) throw DimensionMismatch("target needs p >= 1 and n_r >= 1");
  for (std::size_t t = 0; t < S.size(); ++t) {
    if (S[t].rows() != n_r || S[t].cols() != regressor_dim()) {
      throw DimensionMismatch(fmt::format("S[{}] is {}x{}, expected {}x{}", t, S[t].rows(),
                                          S[t].cols(), n_r, regressor_dim()));
    }
  }
}

RegressorBuffer::RegressorBuffer(int n_r, int p, bool affine)
    : n_r_(n_r), p_(p), affine_(affine), z_(VectorXd::Zero(n_r * p + (affine ? 1 : 0))) {
  if (affine_) z_(z_.size() - 1) = 1.0;
}

void RegressorBuffer::reset(const VectorXd& r0) {
  if (r0.size() != n_r_) throw DimensionMismatch("regressor reset with wrong target size");
  z_ = initial_regressor(r0, p_, affine_);
}

void RegressorBuffer::push(const VectorXd& r) {
  if (r.size() != n_r_) throw DimensionMismatch("regressor push with wrong target size");
  const int lag = n_r_ * p_;
  // Shift older lags down by one block; newest goes on top.
  for (int i = lag - 1; i >= n_r_; --i) z_(i) = z_(i - n_r_);
  z_.head(n_r_) = r;
}

VectorXd initial_regressor(const VectorXd& r, int p, bool affine) {
  const auto n_r = r.size();
  VectorXd z(n_r * p + (affine ? 1 : 0));
  for (int j = 0; j < p; ++j) z.segment(j * n_r, n_r) = r;
  if (affine) z(z.size() - 1) = 1.0;
  return z;
}

TargetProcess::TargetProcess(TargetSchedule schedule, const VectorXd& r0, double d_r)
    : schedule_(std::move(schedule)),
      buffer_(schedule_.n_r, schedule_.p, schedule_.affine),
      r_(r0),
      d_r_(d_r) {
  schedule_.validate();
  buffer_.reset(r0);
  max_norm_ = r0.norm();
  if (max_norm_ > d_r_) ++violations_;
}

const VectorXd& TargetProcess::step() {
  if (t_ + 1 > schedule_.horizon()) throw DimensionMismatch("target schedule exhausted");
  r_ = schedule_.S[t_ + 1] * buffer_.z();
  buffer_.push(r_);
  ++t_;
  const double nr = r_.norm();
  max_norm_ = std::max(max_norm_, nr);
  if (nr > d_r_) ++violations_;
  return r_;
}

std::vector<VectorXd> TargetProcess::rollout() {
  std::vector<VectorXd> out;
  out.reserve(schedule_.horizon() - t_ + 1);
  out.push_back(r_);
  while (t_ < schedule_.horizon()) out.push_back(step());
  return out;
}

MatrixXd extended_matrix(const TargetSchedule& sched, int t) {
  const int d = sched.regressor_dim();
  const int lag = sched.lag_dim();
  const int n_r = sched.n_r;
  MatrixXd Aext = MatrixXd::Zero(d, d);
  Aext.topRows(n_r) = sched.S.at(t);
  for (int j = 1; j < sched.p; ++j) {
    Aext.block(j * n_r, (j - 1) * n_r, n_r, n_r).setIdentity();
  }
  if (sched.affine) Aext(lag, lag) = 1.0;
  return Aext;
}

MatrixXd selector_matrix(const TargetSchedule& sched) {
  MatrixXd Bsel = MatrixXd::Zero(sched.regressor_dim(), sched.n_r);
  Bsel.topRows(sched.n_r).setIdentity();
  return Bsel;
}

MatrixXd multi_step_matrix(const TargetSchedule& sched, int t, int k) {
  if (k < 1) throw DomainError("multi-step matrix needs k >= 1");
  if (t + k > sched.horizon()) throw DimensionMismatch("multi-step matrix beyond schedule");
  const int d = sched.regressor_dim();
  MatrixXd Phi = MatrixXd::Identity(d, d);
  for (int j = 1; j <= k; ++j) Phi = extended_matrix(sched, t + j) * Phi;
  return Phi.topRows(sched.n_r);
}

MatrixXd multi_step_matrix(std::span<const MatrixXd> steps, int n_r, int p, bool affine) {
  TargetSchedule sched;
  sched.n_r = n_r;
  sched.p = p;
  sched.affine = affine;
  sched.S.reserve(steps.size() + 1);
  sched.S.push_back(MatrixXd::Zero(n_r, sched.regressor_dim()));
  for (const auto& S : steps) sched.S.push_back(S);
  sched.validate();
  return multi_step_matrix(sched, 0, static_cast<int>(steps.size()));
}

double path_length_V(const TargetSchedule& sched) {
  double total = 0.0;
  for (int t = 0; t < sched.horizon(); ++t) total += (sched.S[t + 1] - sched.S[t]).norm();
  return total;
}

double path_length_Vk(const TargetSchedule& sched, int k) {
  if (k < 1) throw DomainError("path length needs k >= 1");
  const int T = sched.horizon();
  double total = 0.0;
  if (T < 2 * k) return total;
  for (int t = k; t <= T - k; ++t) {
    const MatrixXd ahead = multi_step_matrix(sched, t, k);       // S_{t+k|t}
    const MatrixXd behind = multi_step_matrix(sched, t - k, k);  // S_{t|t-k}
    total += spectral_norm(ahead - behind);
  }
  return total;
}

double path_length_L(std::span<const VectorXd> targets) {
  double total = 0.0;
  for (std::size_t t = 1; t < targets.size(); ++t) total += (targets[t] - targets[t - 1]).norm();
  return total;
}

double max_multistep_norm(const TargetSchedule& sched, int k_max) {
  const int T = sched.horizon();
  const int d = sched.regressor_dim();
  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    MatrixXd Phi = MatrixXd::Identity(d, d);
    for (int j = 1; j <= k_max && t + j <= T; ++j) {
      Phi = extended_matrix(sched, t + j) * Phi;
      worst = std::max(worst, spectral_norm(Phi.topRows(sched.n_r)));
    }
  }
  return worst;
}

MatrixXd make_circle(double theta, double Ts) {
  MatrixXd S(4, 4);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // clang-format off
  S << 1, 0, Ts, 0,
       0, 1, 0,  Ts,
       0, 0, c,  -s,
       0, 0, s,  c;
  // clang-format on
  return S;
}

int switch_period(int T) {
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(T)))));
}

std::vector<MatrixXd> make_benchmark_dynamic(int T, double Ts, double theta0) {
  if (T < 1) throw DomainError("benchmark target needs T > 0");
  const int period = switch_period(T);
  std::vector<MatrixXd> out;
  out.reserve(T + 1);
  double s = 1.0;
  double theta = theta0;
  int phase = 0;
  for (int t = 0; t <= T; ++t) {
    while (phase < t / period) {
      s = -s;
      theta = -0.99 * theta;
      ++phase;
    }
    MatrixXd S = make_circle(theta, Ts);
    S.bottomRightCorner(2, 2) *= s;
    out.push_back(std::move(S));
  }
  return out;
}

SpiralSchedule make_sqrtT_spiral(int T, std::uint64_t seed, double theta, double Ts,
                                 double scale_lo, double scale_hi, const Eigen::Vector2d& shift) {
  if (T < 1) throw DomainError("spiral target needs T > 0");
  CounterRng rng(seed, /*stream=*/0x5b1a);
  const int period = switch_period(T);
  MatrixXd base = MatrixXd::Zero(4, 5);
  base.leftCols(4) = make_circle(theta, Ts);

  SpiralSchedule out;
  out.S.reserve(T + 1);
  double radius = 1.0;  // relative to the initial circle
  for (int t = 0; t <= T; ++t) {
    if (period >= 2 && t >= period && t % period == 0) {
      const double f = rng.uniform(scale_lo, scale_hi);
      MatrixXd S = base;
      S.block(2, 2, 2, 2) *= f / radius;
      radius = f;
      S.block(0, 4, 2, 1) = shift;
      out.switch_steps.push_back(t);
      out.factors.push_back(f);
      out.S.push_back(std::move(S));
    } else {
      out.S.push_back(base);
    }
  }
  for (int t = 0; t < T; ++t) out.V_T += (out.S[t + 1] - out.S[t]).norm();
  return out;
}

UniformTargetSampler::UniformTargetSampler(std::uint64_t seed)
    : rng_(seed, /*stream=*/0x0f1f) {}

VectorXd UniformTargetSampler::next() {
  VectorXd r(2);
  r(0) = rng_.uniform(-1.0, 1.0);
  r(1) = rng_.uniform(-1.0, 1.0);
  return r;
}

std::pair<TargetSchedule, VectorXd> make_uniform_random(int T, std::uint64_t seed) {
  if (T < 1) throw DomainError("uniform target needs T > 0");
  UniformTargetSampler sampler(seed);
  auto draw = [&sampler] { return sampler.next(); };
  TargetSchedule sched;
  sched.n_r = 2;
  sched.p = 1;
  sched.affine = true;
  const VectorXd r0 = draw();
  MatrixXd S0 = MatrixXd::Zero(2, 3);
  S0.col(2) = r0;
  sched.S.push_back(S0);
  for (int t = 1; t <= T; ++t) {
    MatrixXd S = MatrixXd::Zero(2, 3);
    S.col(2) = draw();
    sched.S.push_back(std::move(S));
  }
  return {std::move(sched), r0};
}

TargetSchedule planar_to_spatial(std::span<const MatrixXd> planar) {
  // planar index -> spatial index
  static constexpr int kMap[4] = {0, 1, 3, 4};
  TargetSchedule sched;
  sched.n_r = 6;
  sched.p = 1;
  sched.affine = true;
  sched.S.reserve(planar.size());
  for (const auto& P : planar) {
    if (P.rows() != 4 || (P.cols() != 4 && P.cols() != 5)) {
      throw DimensionMismatch("planar matrices must be 4x4 or 4x5");
    }
    MatrixXd S = MatrixXd::Zero(6, 7);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) S(kMap[i], kMap[j]) = P(i, j);
      if (P.cols() == 5) S(kMap[i], 6) = P(i, 4);
    }
    S(2, 2) = 1.0;
    S(2, 5) = P(0, 2);  // vertical position integrates with the same Ts
    S(5, 5) = 1.0;
    sched.S.push_back(std::move(S));
  }
  return sched;
}

VectorXd circle_initial_state(double theta, double Ts, double radius, double height) {
  // Centre c = p0 + Ts (I - R)^{-1} v0 = 0  =>  v0 = -(I - R) p0 / Ts.
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  VectorXd r(6);
  r << radius, 0.0, height, -(1.0 - c) * radius / Ts, s * radius / Ts, 0.0;
  return r;
}

TargetSchedule make_random_schedule(int n_r, int p, int T, double M, int switch_every,
                                    std::uint64_t seed) {
  if (switch_every < 1) throw DomainError("switch period must be positive");
  CounterRng rng(seed, /*stream=*/0x7a11);
  TargetSchedule sched;
  sched.n_r = n_r;
  sched.p = p;
  sched.affine = false;
  auto fresh = [&] {
    MatrixXd S(n_r, n_r * p);
    for (int i = 0; i < S.rows(); ++i)
      for (int j = 0; j < S.cols(); ++j) S(i, j) = rng.normal();
    Eigen::JacobiSVD<MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd sv = svd.singularValues();
    // Scale into the ball, then clip so the result has norm <= M.
    const double scale = rng.uniform(0.3, 1.2) * M / std::max(sv(0), 1e-300);
    sv = (sv * scale).cwiseMin(M);
    return MatrixXd(svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose());
  };
  MatrixXd current = fresh();
  for (int t = 0; t <= T; ++t) {
    if (t > 0 && t % switch_every == 0) current = fresh();
    sched.S.push_back(current);
  }
  return sched;
}

ReferenceLift ReferenceLift::identity(int n) { return {MatrixXd::Identity(n, n)}; }

ReferenceLift ReferenceLift::leading(int n, int n_r) {
  if (n_r > n) throw DimensionMismatch("cannot lift into a smaller space");
  MatrixXd E = MatrixXd::Zero(n, n_r);
  E.topRows(n_r).setIdentity();
  return {E};
}

void ReferenceLift::validate() const {
  if (E.rows() < E.cols()) throw DimensionMismatch("lift must not reduce dimension");
  for (int j = 0; j < E.cols(); ++j) {
    int ones = 0;
    for (int i = 0; i < E.rows(); ++i) {
      if (E(i, j) == 1.0) ++ones;
      else if (E(i, j) != 0.0) throw DomainError("lift entries must be 0 or 1");
    }
    if (ones != 1) throw DomainError("each lift column needs exactly one 1");
  }
  for (int i = 0; i < E.rows(); ++i) {
    if (E.row(i).sum() > 1.0) throw DomainError("each lift row may hold at most one 1");
  }
}

VectorXd ReferenceLift::lift(const VectorXd& r) const {
  if (r.size() != E.cols()) throw DimensionMismatch("target has wrong size for lift");
  return E * r;
}

std::vector<VectorXd> ReferenceLift::lift(std::span<const VectorXd> rs) const {
  std::vector<VectorXd> out;
  out.reserve(rs.size());
  for (const auto& r : rs) out.push_back(lift(r));
  return out;
}

}  // namespace plot
