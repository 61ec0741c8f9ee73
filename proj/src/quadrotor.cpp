#include "plot/quadrotor.hpp"

#include "plot/errors.hpp"

namespace plot {

void QuadrotorParams::validate() const {
  if (!(Ts > 0.0 && mass > 0.0 && g > 0.0)) {
    throw DomainError("quadrotor parameters must be strictly positive");
  }
}

LinearSystem build_quadrotor(const QuadrotorParams& params) {
  params.validate();
  const double Ts = params.Ts;
  LinearSystem sys;
  sys.A = MatrixXd::Identity(9, 9);
  sys.A(0, 3) = Ts;
  sys.A(1, 4) = Ts;
  sys.A(2, 5) = Ts;
  sys.A(3, 7) = params.g * Ts;   // pitch accelerates along x
  sys.A(4, 6) = -params.g * Ts;  // roll accelerates along -y

  sys.B = MatrixXd::Zero(9, 4);
  sys.B(5, 0) = Ts / params.mass;
  sys.B(6, 1) = Ts;
  sys.B(7, 2) = Ts;
  sys.B(8, 3) = Ts;

  Eigen::VectorXd q(9), r(4);
  q << 80, 80, 80, 10, 10, 10, 0.01, 0.01, 0.1;
  r << 0.7, 2.5, 2.5, 2.5;
  sys.Q = q.asDiagonal();
  sys.R = r.asDiagonal();
  return sys;
}

}  // namespace plot
