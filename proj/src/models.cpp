#include "blockcov/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <vector>

#include "blockcov/rng.hpp"

namespace blockcov {

namespace {

double smallest_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("smallest_eigenvalue: eigensolver failed");
  return solver.eigenvalues().minCoeff();
}

}  // namespace

Matrix generate_model1(Index p, double rho, std::uint64_t seed) {
  if (p < 1) throw ParameterError("generate_model1: p must be >= 1");
  if (!(rho > 0 && rho < 1)) throw ParameterError("generate_model1: rho must be in (0, 1)");

  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    RngStream rng(seed, attempt);
    Matrix sigma = Matrix::Identity(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j) {
        const double gap = static_cast<double>(j - i);
        const double value = rho * rng.uniform01() / (gap * gap);
        sigma(i, j) = value;
        sigma(j, i) = value;
      }
    if (p == 1 || smallest_eigenvalue(sigma) > 0) return sigma;
    std::cerr << "note: model1 draw " << attempt << " not positive definite, redrawing\n";
  }
  throw DefinitenessError("generate_model1: no positive definite draw in 1000 attempts");
}

Matrix model2_base(Index p, std::uint64_t seed) {
  if (p < 1) throw ParameterError("model2_base: p must be >= 1");
  RngStream rng(seed, 0);
  Matrix a = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) {
      const double gap = static_cast<double>(j - i);
      const double value = rng.normal() / (gap * gap);
      a(i, j) = value;
      a(j, i) = value;
    }
  return a;
}

Matrix generate_model2(Index p, std::uint64_t seed) {
  Matrix a = model2_base(p, seed);
  const double shift = p == 1 ? 0.0 : std::max(0.0, -1.1 * smallest_eigenvalue(a));
  a.diagonal().array() += shift;
  return a;
}

Matrix sample_gaussian(const Eigen::Ref<const Matrix>& sigma, Index n, std::uint64_t seed) {
  detail::require_square(sigma, "sample_gaussian");
  if (n < 0) throw ParameterError("sample_gaussian: n must be >= 0");
  const Index p = sigma.rows();
  if (n == 0) return Matrix(0, p);

  Matrix chol;
  try {
    chol = cholesky_lower(sigma);
  } catch (const DefinitenessError&) {
    Matrix ridged = sigma;
    ridged.diagonal().array() += 1e-12;
    try {
      chol = cholesky_lower(ridged);
    } catch (const DefinitenessError&) {
      throw DefinitenessError("sample_gaussian: sigma is not positive semi-definite");
    }
  }

  RngStream rng(seed, 0);
  Matrix data(n, p);
  Vector z(p);
  for (Index r = 0; r < n; ++r) {
    for (Index j = 0; j < p; ++j) z(j) = rng.normal();
    data.row(r) = (chol * z).transpose();
  }
  return data;
}

ClassCheck check_class_membership(const Eigen::Ref<const Matrix>& sigma,
                                  const ClassParams& params) {
  detail::require_square(sigma, "check_class_membership");
  if (!(params.alpha > 0)) throw ParameterError("check_class_membership: alpha must be > 0");
  if (!(params.M > 0)) throw ParameterError("check_class_membership: M must be > 0");
  if (!(params.M0 >= 1)) throw ParameterError("check_class_membership: M0 must be >= 1");

  const Index p = sigma.rows();
  ClassCheck out;

  // tail(k, j) = sum over |i - j| >= k of |sigma_ij|, via suffix sums by lag.
  if (p > 1) {
    Matrix lag_sums = Matrix::Zero(p, p);  // (k, j) -> sum of |sigma_ij| at lag exactly k
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i) lag_sums(std::abs(i - j), j) += std::abs(sigma(i, j));
    for (Index k = p - 2; k >= 1; --k) lag_sums.row(k) += lag_sums.row(k + 1);

    for (Index k = 1; k <= p - 1; ++k) {
      const double tail = lag_sums.row(k).maxCoeff();
      const double scaled = std::pow(static_cast<double>(k), params.alpha) * tail;
      if (scaled > out.tail_sup) {
        out.tail_sup = scaled;
        out.worst_k = k;
      }
    }
  }

  const SymEigen eig = sym_eigen(sigma);
  out.lambda_min = eig.values.minCoeff();
  out.lambda_max = eig.values.maxCoeff();
  out.in_class = out.tail_sup <= params.M && out.lambda_min * params.M0 >= 1.0 &&
                 out.lambda_max <= params.M0;
  return out;
}

}  // namespace blockcov
