#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blockcov/baselines.hpp"
#include "blockcov/estimators.hpp"
#include "blockcov/models.hpp"

namespace blockcov {

struct CovarianceModel {
  enum class Kind { model1, model2, explicit_matrix };

  Kind kind = Kind::model1;
  double rho = 0.6;  // model1
  Matrix matrix;     // explicit_matrix

  // One covariance draw at dimension p.  Explicit matrices ignore the seed.
  Matrix draw(Index p, std::uint64_t seed) const;
};

struct MethodSpec {
  enum class Kind { blockthresh, sample, banding, tapering };

  Kind kind = Kind::blockthresh;
  std::string name;          // output label; defaulted from kind when empty
  EstimatorConfig config;    // blockthresh
  BandwidthSpec bandwidth;   // banding / tapering

  std::string label() const;
};

struct SizePair {
  Index n = 0;
  Index p = 0;
};

struct ExperimentSpec {
  CovarianceModel model;
  std::vector<SizePair> sizes;
  int reps = 50;
  std::vector<MethodSpec> methods;
  std::vector<LossMetric> metrics{LossMetric::spectral};
  std::uint64_t seed = 0;
};

struct LossSeries {
  std::string method;
  Index n = 0;
  Index p = 0;
  LossMetric metric = LossMetric::spectral;
  std::vector<double> losses;  // indexed by replicate
};

struct ExperimentResult {
  std::vector<LossSeries> series;
};

// Runs reps replicates per size: each replicate draws its own covariance,
// samples n rows, and fits every method on that one dataset.  Replicates own
// disjoint seed streams keyed by (size, replicate), so the result is
// bit-identical for any worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs = 1);

struct SummaryRow {
  std::string method;
  Index n = 0;
  Index p = 0;
  LossMetric metric = LossMetric::spectral;
  int count = 0;
  double mean = 0, se = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

std::vector<SummaryRow> summarize(const ExperimentResult& result);

// CSV renderings (single header line, then data rows, numbers at 17
// significant digits) and the matching parser for the losses table.
std::string losses_csv(const ExperimentResult& result);
std::string summary_csv(const std::vector<SummaryRow>& rows);
ExperimentResult parse_losses_csv(std::istream& in);

const char* metric_name(LossMetric metric);
LossMetric metric_from_name(const std::string& name);

double quantile(std::vector<double> values, double q);  // linear interpolation
double median(std::vector<double> values);

// ---- empirical guarantee suites ----

struct ConcentrationReport {
  int trials = 0;
  int violations = 0;  // trials where any block broke its deviation bound
  double bound = 0;    // theoretical per-trial failure probability
};

// Samples from N(0, I_p) and checks every partition block's deviation
// |S_B - I_B| against c0 * t * sqrt((d(B) + ln p) / n), c0 = 5.44.
ConcentrationReport concentration_suite(Index p, Index n, double t, int trials,
                                        std::uint64_t seed, Index k0 = 0);

// Median over trials of the largest blockwise deviation; used for rate checks
// against the n^(-1/2) scaling.
double concentration_median_deviation(Index p, Index n, int trials, std::uint64_t seed,
                                      Index k0 = 0);

// Random symmetric matrices and random group splits; counts cases where the
// compressed norm fails to dominate (tolerance 1e-10).
int compression_suite(int trials, Index max_p, std::uint64_t seed);

// Draws model1 covariances, certifies each draw's decay constant, and checks
// |Sigma_B| <= M * d(B)^-alpha + 1e-10 on every block with d(B) >= 2*k0.
int block_norm_bound_suite(int draws, Index p, double rho, double alpha, std::uint64_t seed);

// Brute-force structural audit of one partition: bounds, k0-alignment,
// dyadic sizes, exact cover, mirror symmetry, diagonal flags, and the
// min|i-j| >= d(B) separation for blocks with d(B) >= 4*k0.
std::vector<std::string> partition_violations(const BlockPartition& part);

// partition_violations over every p in [1, max_p], k0 in [1, min(max_k0, p)].
int partition_suite(Index max_p, Index max_k0);

}  // namespace blockcov
