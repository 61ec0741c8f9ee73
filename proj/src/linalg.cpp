#include "plot/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace plot {

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double min_eigenvalue_sym(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue_sym(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_radius(const MatrixXd& M) {
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_symmetric(const MatrixXd& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace plot
