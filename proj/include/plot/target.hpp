#pragma once

// Time-varying autoregressive target processes
//
//   r_{t+1} = S_{t+1} z_t + v_{t+1},   z_t = [r_tᵀ … r_{t-p+1}ᵀ]ᵀ,
//
// stored as explicit schedules. With the affine flag set the regressor is
// augmented with a trailing 1 and each stored matrix is S̃_t = [S_t  v_t].

#include <cstdint>
#include <span>
#include <vector>

#include "plot/linalg.hpp"
#include "plot/rng.hpp"

namespace plot {

struct TargetSchedule {
  int p = 1;
  int n_r = 0;
  bool affine = false;
  /// S[t] for t = 0..T, each n_r x regressor_dim(). S[0] only enters path
  /// lengths; the rollout uses S[1..T].
  std::vector<MatrixXd> S;

  int lag_dim() const { return n_r * p; }
  int regressor_dim() const { return lag_dim() + (affine ? 1 : 0); }
  int horizon() const { return static_cast<int>(S.size()) - 1; }

  /// Throws DimensionMismatch on inconsistent shapes.
  void validate() const;
};

/// Regressor z_t maintained by shifting: the newest target enters at the
/// top and the oldest drops. Missing history is filled with the first
/// target (all lags equal r_0).
class RegressorBuffer {
 public:
  RegressorBuffer(int n_r, int p, bool affine);

  void reset(const VectorXd& r0);
  void push(const VectorXd& r);

  const VectorXd& z() const { return z_; }
  int dim() const { return static_cast<int>(z_.size()); }

 private:
  int n_r_;
  int p_;
  bool affine_;
  VectorXd z_;
};

/// Regressor with every lag set to r (plus the affine 1), used for z_{-1}.
VectorXd initial_regressor(const VectorXd& r, int p, bool affine);

class TargetProcess {
 public:
  /// d_r is the bound used for the boundedness audit; steps that exceed it
  /// are counted, not rejected.
  TargetProcess(TargetSchedule schedule, const VectorXd& r0, double d_r);

  /// Produces r_{t+1} = S̃_{t+1} z_t and shifts the regressor.
  const VectorXd& step();

  int time() const { return t_; }
  const VectorXd& current() const { return r_; }
  const VectorXd& regressor() const { return buffer_.z(); }
  const TargetSchedule& schedule() const { return schedule_; }
  int bound_violations() const { return violations_; }
  double max_norm() const { return max_norm_; }

  /// r_0..r_T, where T is the schedule horizon.
  std::vector<VectorXd> rollout();

 private:
  TargetSchedule schedule_;
  RegressorBuffer buffer_;
  VectorXd r_;
  double d_r_;
  int t_ = 0;
  int violations_ = 0;
  double max_norm_ = 0.0;
};

/// Companion-form transition of the extended state z (size regressor_dim):
/// S_t in the top block row, shifted identities below, and a fixed 1 for the
/// affine coordinate.
MatrixXd extended_matrix(const TargetSchedule& sched, int t);

/// Selector with an identity in the top block, so r_t = selectorᵀ z_t.
MatrixXd selector_matrix(const TargetSchedule& sched);

/// S_{t+k|t} = selectorᵀ 𝒜_{t+k}···𝒜_{t+1}; r_{t+k} = S_{t+k|t} z_t.
MatrixXd multi_step_matrix(const TargetSchedule& sched, int t, int k);

/// Same as above from an explicit list S_{t+1}..S_{t+k}.
MatrixXd multi_step_matrix(std::span<const MatrixXd> steps, int n_r, int p, bool affine);

/// V_T = sum_t |S_{t+1} - S_t|_F over the stored schedule.
double path_length_V(const TargetSchedule& sched);

/// V^k_T = sum_{t=k}^{T-k} |S_{t+k|t} - S_{t|t-k}| (spectral norm).
double path_length_Vk(const TargetSchedule& sched, int k);

/// L_T = sum_t |r_t - r_{t-1}|.
double path_length_L(std::span<const VectorXd> targets);

/// max spectral norm of S_{t+j|t} over all t and 1 <= j <= k_max.
double max_multistep_norm(const TargetSchedule& sched, int k_max);

// ---------------------------------------------------------------------------
// Generators. Planar targets use the state [p_x, p_y, v_x, v_y].

/// Circle with constant speed; theta = 0 gives constant velocity.
MatrixXd make_circle(double theta, double Ts);

/// S_0..S_T (4x4) of the sign-flipping benchmark: every floor(sqrt(T)) steps
/// s <- -s and theta <- -0.99 theta, starting from s = 1, theta = 0.06.
std::vector<MatrixXd> make_benchmark_dynamic(int T, double Ts, double theta0 = 0.06);

/// Number of steps between switches, floor(sqrt(T)).
int switch_period(int T);

struct SpiralSchedule {
  std::vector<MatrixXd> S;       // S̃_0..S̃_T, 4x5 (planar with affine column)
  std::vector<int> switch_steps;
  std::vector<double> factors;
  double V_T = 0.0;
};

/// Circle dynamics whose radius is reset every floor(sqrt(T)) steps to f
/// times the initial radius, f ~ U[scale_lo, scale_hi], while the position is
/// shifted by `shift`. Each switch is a single-step change of S̃ (velocity
/// scaled by f / f_prev, shift in the affine column), so the radius stays
/// bounded. No switches are generated when floor(sqrt(T)) < 2.
SpiralSchedule make_sqrtT_spiral(int T, std::uint64_t seed, double theta = 0.06,
                                 double Ts = 0.1, double scale_lo = 0.7,
                                 double scale_hi = 1.5,
                                 const Eigen::Vector2d& shift = Eigen::Vector2d(-0.1, 0.1));

/// i.i.d. U([-1,1]^2) targets.
class UniformTargetSampler {
 public:
  explicit UniformTargetSampler(std::uint64_t seed);
  VectorXd next();

 private:
  CounterRng rng_;
};

/// Trivial ARX representation of i.i.d. uniform targets: S̃_t = [0  v_t]
/// with v_t the t-th sample, so r_t = v_t. Returns the schedule and r_0.
std::pair<TargetSchedule, VectorXd> make_uniform_random(int T, std::uint64_t seed);

/// Lifts planar 4x4 (or 4x5 affine) matrices into the 6-dimensional target
/// [p_x, p_y, p_z, v_x, v_y, v_z] with the vertical channel integrating a
/// constant velocity. The result is always affine with p = 1.
TargetSchedule planar_to_spatial(std::span<const MatrixXd> planar);

/// Point on the circle of radius `radius` centred at the origin, at angle 0,
/// with the velocity that keeps the discrete circle centred: returns the
/// spatial target [radius, 0, height, v_x, v_y, 0].
VectorXd circle_initial_state(double theta, double Ts, double radius = 1.0,
                              double height = 0.0);

/// Random schedule whose matrices lie in the spectral ball of radius M
/// (singular values clipped), switching to a fresh matrix every
/// `switch_every` steps.
TargetSchedule make_random_schedule(int n_r, int p, int T, double M, int switch_every,
                                    std::uint64_t seed);

/// Selection matrix embedding targets into plant coordinates.
struct ReferenceLift {
  MatrixXd E;  // n x n_r

  static ReferenceLift identity(int n);
  /// The first n_r plant coordinates receive the target; the rest are zero.
  static ReferenceLift leading(int n, int n_r);

  /// Exactly one 1 per column and at most one per row; DimensionMismatch or
  /// DomainError otherwise.
  void validate() const;
  VectorXd lift(const VectorXd& r) const;
  std::vector<VectorXd> lift(std::span<const VectorXd> rs) const;
};

}  // namespace plot
