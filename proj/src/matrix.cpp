#include "blockcov/matrix.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace blockcov {

namespace {

bool numerically_symmetric(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  return asym <= 1e-12 * scale;
}

}  // namespace

double spectral_norm(const Eigen::Ref<const Matrix>& a) {
  detail::require_nonempty(a, "spectral_norm");
  if (numerically_symmetric(a)) {
    Matrix sym = (a + a.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      throw ConvergenceError("spectral_norm: eigensolver failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  if (svd.info() != Eigen::Success)
    throw ConvergenceError("spectral_norm: SVD failed");
  return svd.singularValues()(0);
}

SymEigen sym_eigen(const Eigen::Ref<const Matrix>& a) {
  detail::require_square(a, "sym_eigen");
  Matrix sym = (a + a.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("sym_eigen: eigensolver failed");
  SymEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Matrix cholesky_lower(const Eigen::Ref<const Matrix>& a) {
  detail::require_square(a, "cholesky_lower");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("cholesky_lower: matrix is not positive definite");
  return llt.matrixL();
}

}  // namespace blockcov
