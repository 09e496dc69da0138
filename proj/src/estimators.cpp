#include "blockcov/estimators.hpp"

#include <cmath>
#include <iostream>
#include <map>

namespace blockcov {

double apply_rule(const ThresholdRule& rule, double z, double lambda) {
  if (lambda < 0) throw ParameterError("apply_rule: lambda must be >= 0");
  switch (rule.kind) {
    case ThresholdKind::hard:
      return std::abs(z) > lambda ? z : 0.0;
    case ThresholdKind::soft: {
      const double shrunk = std::abs(z) - lambda;
      return shrunk > 0 ? (z < 0 ? -shrunk : shrunk) : 0.0;
    }
    case ThresholdKind::adaptive_lasso: {
      if (rule.eta < 1) throw ParameterError("apply_rule: adaptive lasso needs eta >= 1");
      if (z == 0.0) return 0.0;
      const double factor = 1.0 - std::pow(std::abs(lambda / z), rule.eta);
      return factor > 0 ? z * factor : 0.0;
    }
  }
  throw ParameterError("apply_rule: unknown rule");
}

Matrix sample_covariance(const Eigen::Ref<const Matrix>& data) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (p == 0) throw DimensionError("sample_covariance: matrix has no columns");
  if (n < 2)
    throw InsufficientDataError("sample_covariance: need n >= 2 rows, got " + std::to_string(n));
  Matrix centered = data.rowwise() - data.colwise().mean();
  Matrix sigma = Matrix::Zero(p, p);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(centered.adjoint(),
                                                   1.0 / static_cast<double>(n - 1));
  sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
  return sigma;
}

Matrix block_threshold(const Eigen::Ref<const Matrix>& sigma_bar, const BlockPartition& part,
                       const EstimatorConfig& config, Index n) {
  detail::require_square(sigma_bar, "block_threshold");
  if (sigma_bar.rows() != part.p)
    throw DimensionError("block_threshold: matrix is " + std::to_string(sigma_bar.rows()) +
                         "x" + std::to_string(sigma_bar.cols()) + " but partition has p=" +
                         std::to_string(part.p));
  if (n < 2) throw InsufficientDataError("block_threshold: need n >= 2, got " + std::to_string(n));
  if (config.lambda0 < 0) throw ParameterError("block_threshold: lambda0 must be >= 0");
  if (config.lambda0 < 5.44)
    std::cerr << "warning: lambda0=" << config.lambda0
              << " is below 5.44, the smallest value with a finite-sample guarantee\n";
  if (config.rule.kind == ThresholdKind::adaptive_lasso && config.rule.eta < 1)
    throw ParameterError("block_threshold: adaptive lasso needs eta >= 1");

  const Index p = part.p;
  const double log_p = std::log(static_cast<double>(p));
  const double kill_above = static_cast<double>(n) / std::log(static_cast<double>(n));

  std::map<std::pair<Index, Index>, double> diag_norms;
  const auto diag_norm = [&](const IndexInterval& span) {
    const auto key = std::make_pair(span.first, span.last);
    auto it = diag_norms.find(key);
    if (it != diag_norms.end()) return it->second;
    const double value =
        spectral_norm(sigma_bar.block(span.first - 1, span.first - 1, span.size(), span.size()));
    diag_norms.emplace(key, value);
    return value;
  };

  Matrix out = Matrix::Zero(p, p);
  for (const Block& b : part.blocks) {
    if (b.diagonal) {
      out.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size()) =
          sigma_bar.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size());
      continue;
    }
    if (b.cols.first < b.rows.first) continue;  // handled through its mirror twin
    if (static_cast<double>(b.dim()) > kill_above) continue;

    const auto blk =
        sigma_bar.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size());
    const double lambda = config.lambda0 * std::sqrt(diag_norm(b.rows) * diag_norm(b.cols)) *
                          std::sqrt((static_cast<double>(b.dim()) + log_p) /
                                    static_cast<double>(n));
    const double magnitude =
        config.rule.norm == BlockNorm::frobenius ? frobenius_norm(blk) : spectral_norm(blk);
    if (magnitude <= 0) continue;
    const double factor = apply_rule(config.rule, magnitude, lambda) / magnitude;
    if (factor == 0.0) continue;

    const Matrix scaled = blk * factor;
    out.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size()) = scaled;
    out.block(b.cols.first - 1, b.rows.first - 1, b.cols.size(), b.rows.size()) =
        scaled.transpose();
  }
  return out;
}

Matrix psd_project(const Eigen::Ref<const Matrix>& sigma_hat, double epsilon) {
  detail::require_square(sigma_hat, "psd_project");
  if (epsilon < 0) throw ParameterError("psd_project: epsilon must be >= 0");
  const SymEigen eig = sym_eigen(sigma_hat);
  if (eig.values.minCoeff() >= epsilon) return sigma_hat;
  const Vector clamped = eig.values.cwiseMax(epsilon);
  Matrix out = eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
  out = ((out + out.transpose()) / 2.0).eval();
  return out;
}

Matrix precision_estimate(const Eigen::Ref<const Matrix>& sigma_hat, double cap) {
  detail::require_square(sigma_hat, "precision_estimate");
  if (!(cap > 0)) throw ParameterError("precision_estimate: cap must be > 0");
  const SymEigen eig = sym_eigen(sigma_hat);
  Vector mapped(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i)
    mapped(i) = eig.values(i) <= 0 ? cap : std::min(1.0 / eig.values(i), cap);
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  out = ((out + out.transpose()) / 2.0).eval();
  return out;
}

EstimateResult estimate(const Eigen::Ref<const Matrix>& data, const EstimatorConfig& config) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (p == 0) throw DimensionError("estimate: matrix has no columns");
  if (n < 2) throw InsufficientDataError("estimate: need n >= 2 rows, got " + std::to_string(n));

  const Index k0 = config.k0 > 0 ? config.k0 : default_k0(p);
  const BlockPartition part = build_partition(p, k0);

  EstimateResult result;
  const Matrix sigma_bar = sample_covariance(data);
  result.sigma_hat = block_threshold(sigma_bar, part, config, n);
  result.sigma_hat_psd = psd_project(result.sigma_hat, config.epsilon_n);
  result.omega_hat = precision_estimate(
      result.sigma_hat, config.inverse_cap ? *config.inverse_cap : static_cast<double>(n));
  return result;
}

}  // namespace blockcov
