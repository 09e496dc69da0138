#pragma once

#include <optional>

#include "blockcov/blocking.hpp"
#include "blockcov/matrix.hpp"

namespace blockcov {

enum class ThresholdKind { hard, soft, adaptive_lasso };
enum class BlockNorm { spectral, frobenius };

// Scalar thresholding rule t_lambda applied to block norms.  All three rules
// satisfy |t(z)| <= |z|, t(z) = 0 whenever |z| <= lambda, and |t(z) - z| <= lambda.
struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::hard;
  double eta = 1.0;  // adaptive lasso exponent, >= 1
  BlockNorm norm = BlockNorm::spectral;
};

double apply_rule(const ThresholdRule& rule, double z, double lambda);

struct EstimatorConfig {
  // Threshold scale.  6 is a conservative default; anything below 5.44 loses
  // the finite-sample guarantee and triggers a warning.
  double lambda0 = 6.0;
  Index k0 = 0;  // base block size; 0 = max(1, floor(ln p))
  ThresholdRule rule;
  double epsilon_n = 0.0;              // eigenvalue floor for psd_project
  std::optional<double> inverse_cap;   // cap for precision_estimate; default n
};

// Sample covariance with divisor n - 1.  Exactly symmetric.
Matrix sample_covariance(const Eigen::Ref<const Matrix>& data);

// Blockwise thresholding of a sample covariance given a partition and the
// sample size n behind it.  Diagonal blocks are kept verbatim; blocks with
// d(B) > n/ln n are zeroed outright; the rest are shrunk by
// t(|S_B|)/|S_B| with per-block threshold
//   lambda0 * sqrt(|S_II| * |S_JJ|) * sqrt((d(B) + ln p) / n).
Matrix block_threshold(const Eigen::Ref<const Matrix>& sigma_bar, const BlockPartition& part,
                       const EstimatorConfig& config, Index n);

// Clamp eigenvalues from below at epsilon.  Inputs already satisfying the
// bound are returned unchanged.
Matrix psd_project(const Eigen::Ref<const Matrix>& sigma_hat, double epsilon);

// Inverse through the eigendecomposition with the reciprocal capped at
// `cap`; non-positive eigenvalues map to the cap as well.
Matrix precision_estimate(const Eigen::Ref<const Matrix>& sigma_hat, double cap);

struct EstimateResult {
  Matrix sigma_hat;
  Matrix sigma_hat_psd;
  Matrix omega_hat;
};

// Full pipeline from an n x p data matrix: sample covariance, block
// thresholding on the default or configured partition, eigenvalue floor, and
// capped inverse (the inverse is taken from sigma_hat, not the floored one).
EstimateResult estimate(const Eigen::Ref<const Matrix>& data, const EstimatorConfig& config);

}  // namespace blockcov
