#pragma once

// Linearized hover model of a small quadrotor.
//
// State  x = [p_x, p_y, p_z, v_x, v_y, v_z, roll, pitch, yaw]
// Input  u = [thrust, roll rate, pitch rate, yaw rate]

#include "plot/lqt.hpp"

namespace plot {

struct QuadrotorParams {
  double Ts = 0.1;      // sampling period [s]
  double mass = 0.033;  // [kg]
  double g = 9.81;      // [m/s^2]

  /// Throws DomainError unless every field is strictly positive.
  void validate() const;
};

/// A, B of the discretized model with the default tracking weights
/// Q = diag(80,80,80,10,10,10,0.01,0.01,0.1), R = diag(0.7,2.5,2.5,2.5).
LinearSystem build_quadrotor(const QuadrotorParams& params = {});

}  // namespace plot
