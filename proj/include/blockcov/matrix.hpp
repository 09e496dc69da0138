#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "blockcov/errors.hpp"

namespace blockcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Closed integer interval of 1-based indices.
struct IndexInterval {
  Index first = 1;
  Index last = 1;

  Index size() const { return last - first + 1; }
  bool operator==(const IndexInterval&) const = default;
};

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // columns aligned with values
};

namespace detail {

template <typename Derived>
void require_nonempty(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (a.rows() == 0 || a.cols() == 0)
    throw DimensionError(std::string(op) + ": empty matrix");
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* op) {
  require_nonempty(a, op);
  if (a.rows() != a.cols())
    throw DimensionError(std::string(op) + ": matrix is " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + ", expected square");
}

}  // namespace detail

// Largest singular value.  Symmetric inputs (detected up to relative
// roundoff) take the selfadjoint path; anything else goes through a full SVD.
double spectral_norm(const Eigen::Ref<const Matrix>& a);

template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  detail::require_nonempty(a, "frobenius_norm");
  return a.norm();
}

// Maximum absolute column sum.
template <typename Derived>
double l1_operator_norm(const Eigen::MatrixBase<Derived>& a) {
  detail::require_nonempty(a, "l1_operator_norm");
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Maximum absolute row sum.
template <typename Derived>
double l_inf_operator_norm(const Eigen::MatrixBase<Derived>& a) {
  detail::require_nonempty(a, "l_inf_operator_norm");
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

// Eigendecomposition of a square matrix, symmetrized by averaging with its
// transpose before factorization.  Eigenvalues come back in descending order.
SymEigen sym_eigen(const Eigen::Ref<const Matrix>& a);

template <typename DerivedA, typename DerivedB>
auto schur_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("schur_product: operands are " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  return a.cwiseProduct(b);
}

template <typename Derived>
Matrix submatrix(const Eigen::MatrixBase<Derived>& a, const IndexInterval& rows,
                 const IndexInterval& cols) {
  if (rows.first < 1 || rows.last > a.rows() || rows.first > rows.last ||
      cols.first < 1 || cols.last > a.cols() || cols.first > cols.last)
    throw DimensionError("submatrix: interval out of range");
  return a.block(rows.first - 1, cols.first - 1, rows.size(), cols.size());
}

// Lower Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky_lower(const Eigen::Ref<const Matrix>& a);

}  // namespace blockcov
