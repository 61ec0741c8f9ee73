#pragma once

#include <Eigen/Dense>

namespace plot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Largest singular value.
double spectral_norm(const MatrixXd& M);

double min_eigenvalue_sym(const MatrixXd& S);
double max_eigenvalue_sym(const MatrixXd& S);

/// max |lambda| over the (possibly complex) eigenvalues of a square matrix.
double spectral_radius(const MatrixXd& M);

bool is_symmetric(const MatrixXd& M, double tol);

/// vᵀ W v
inline double weighted_sq_norm(const VectorXd& v, const MatrixXd& W) {
  return v.dot(W * v);
}

}  // namespace plot
