#include "blockcov/baselines.hpp"

#include <cmath>
#include <iostream>

namespace blockcov {

BandwidthSpec BandwidthSpec::fixed(Index k) {
  if (k < 1) throw ParameterError("BandwidthSpec: fixed k must be >= 1");
  return {Mode::fixed, k, 0.0};
}

BandwidthSpec BandwidthSpec::banding(double alpha) {
  if (!(alpha > 0)) throw ParameterError("BandwidthSpec: alpha must be > 0");
  return {Mode::banding_rate, 1, alpha};
}

BandwidthSpec BandwidthSpec::tapering(double alpha) {
  if (!(alpha > 0)) throw ParameterError("BandwidthSpec: alpha must be > 0");
  return {Mode::tapering_rate, 1, alpha};
}

Matrix banding_weights(Index p, Index k) {
  if (p < 1) throw ParameterError("banding_weights: p must be >= 1");
  if (k < 0) throw ParameterError("banding_weights: k must be >= 0");
  Matrix w(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) w(i, j) = std::abs(i - j) <= k ? 1.0 : 0.0;
  return w;
}

Matrix tapering_weights(Index p, Index k) {
  if (p < 1) throw ParameterError("tapering_weights: p must be >= 1");
  if (k < 2) throw ParameterError("tapering_weights: k must be >= 2");
  if (k % 2 != 0) {
    std::cerr << "warning: tapering bandwidth k=" << k << " is odd, using k=" << k - 1 << "\n";
    --k;
  }
  const double kd = static_cast<double>(k);
  const double kh = kd / 2.0;
  Matrix w(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) {
      const double d = static_cast<double>(std::abs(i - j));
      w(i, j) = (2.0 / kd) * (std::max(kd - d, 0.0) - std::max(kh - d, 0.0));
    }
  return w;
}

Index select_bandwidth(const BandwidthSpec& spec, Index n, Index p) {
  switch (spec.mode) {
    case BandwidthSpec::Mode::fixed:
      return spec.k;
    case BandwidthSpec::Mode::banding_rate: {
      if (n < 2 || p < 2) throw ParameterError("select_bandwidth: need n >= 2 and p >= 2");
      const double k = std::floor(std::pow(static_cast<double>(n) /
                                               std::log(static_cast<double>(p)),
                                           1.0 / (2.0 * (spec.alpha + 1.0))));
      return std::max<Index>(1, static_cast<Index>(k));
    }
    case BandwidthSpec::Mode::tapering_rate: {
      if (n < 2 || p < 2) throw ParameterError("select_bandwidth: need n >= 2 and p >= 2");
      const double k =
          std::floor(std::pow(static_cast<double>(n), 1.0 / (2.0 * spec.alpha + 1.0)));
      return std::max<Index>(1, static_cast<Index>(k));
    }
  }
  throw ParameterError("select_bandwidth: unknown mode");
}

Matrix band_or_taper(const Eigen::Ref<const Matrix>& sigma_bar,
                     const Eigen::Ref<const Matrix>& weights) {
  detail::require_square(sigma_bar, "band_or_taper");
  return schur_product(sigma_bar, weights);
}

double loss(const Eigen::Ref<const Matrix>& estimate, const Eigen::Ref<const Matrix>& truth,
            LossMetric metric) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw DimensionError("loss: estimate is " + std::to_string(estimate.rows()) + "x" +
                         std::to_string(estimate.cols()) + ", truth is " +
                         std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  const Matrix diff = estimate - truth;
  switch (metric) {
    case LossMetric::spectral: return spectral_norm(diff);
    case LossMetric::frobenius: return frobenius_norm(diff);
    case LossMetric::l1: return l1_operator_norm(diff);
  }
  throw ParameterError("loss: unknown metric");
}

}  // namespace blockcov
