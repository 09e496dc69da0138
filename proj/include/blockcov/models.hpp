#pragma once

#include <cstdint>

#include "blockcov/matrix.hpp"

namespace blockcov {

// Unit-diagonal covariance with polynomially decaying off-diagonal entries
// sigma_ij = rho * u_ij / (i - j)^2, u_ij = u_ji ~ U(0,1).  Draws that fail
// to be positive definite are rejected and redrawn.
Matrix generate_model1(Index p, double rho, std::uint64_t seed);

// Pre-shift matrix for the second model: symmetric, zero diagonal, entries
// a_ij ~ N(0, (i - j)^-4) for i < j.
Matrix model2_base(Index p, std::uint64_t seed);

// model2_base shifted to be positive definite:
// sigma = max(0, -1.1 * lambda_min(A)) * I + A.
Matrix generate_model2(Index p, std::uint64_t seed);

// n independent rows from N(0, sigma).  Falls back to a 1e-12 ridge when the
// Cholesky factorization fails, and reports a definiteness error if the
// ridged matrix still fails.
Matrix sample_gaussian(const Eigen::Ref<const Matrix>& sigma, Index n, std::uint64_t seed);

struct ClassParams {
  double alpha = 1.0;  // decay exponent, > 0
  double M = 1.0;      // tail constant, > 0
  double M0 = 1.0;     // eigenvalue bound, >= 1
};

struct ClassCheck {
  bool in_class = false;
  Index worst_k = 0;     // lag maximizing k^alpha * tail(k); 0 when p == 1
  double tail_sup = 0;   // max_k k^alpha * max_j sum_{|i-j| >= k} |sigma_ij|
  double lambda_min = 0;
  double lambda_max = 0;
};

// Membership test for the decay class: tails bounded by M * k^-alpha for
// every lag k in [1, p-1], and spectrum within [1/M0, M0].  tail_sup is the
// smallest M for which the tail condition holds, so callers can certify a
// matrix numerically.
ClassCheck check_class_membership(const Eigen::Ref<const Matrix>& sigma,
                                  const ClassParams& params);

}  // namespace blockcov
