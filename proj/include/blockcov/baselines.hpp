#pragma once

#include "blockcov/matrix.hpp"

namespace blockcov {

// Bandwidth choice for the banding/tapering baselines: either a fixed k or a
// smoothness-indexed rate evaluated at (n, p).
struct BandwidthSpec {
  enum class Mode { fixed, banding_rate, tapering_rate };

  Mode mode = Mode::fixed;
  Index k = 1;          // fixed mode
  double alpha = 1.0;   // rate modes

  static BandwidthSpec fixed(Index k);
  static BandwidthSpec banding(double alpha);
  static BandwidthSpec tapering(double alpha);
};

// 0/1 mask keeping |i - j| <= k.
Matrix banding_weights(Index p, Index k);

// Flat-top piecewise linear taper: weight 1 up to lag k/2, linear decay to 0
// at lag k.  k must be even and >= 2; odd k is rounded down with a warning.
Matrix tapering_weights(Index p, Index k);

// fixed -> k; banding rate -> floor((n/ln p)^(1/(2(alpha+1))));
// tapering rate -> floor(n^(1/(2 alpha+1))).  Never below 1.
Index select_bandwidth(const BandwidthSpec& spec, Index n, Index p);

// Entrywise product of the sample covariance with a weight mask.
Matrix band_or_taper(const Eigen::Ref<const Matrix>& sigma_bar,
                     const Eigen::Ref<const Matrix>& weights);

enum class LossMetric { spectral, frobenius, l1 };

double loss(const Eigen::Ref<const Matrix>& estimate, const Eigen::Ref<const Matrix>& truth,
            LossMetric metric);

}  // namespace blockcov
