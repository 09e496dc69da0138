#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "blockcov/estimators.hpp"
#include "blockcov/models.hpp"
#include "blockcov/rng.hpp"
#include "oracles.hpp"

using blockcov::BlockNorm;
using blockcov::BlockPartition;
using blockcov::EstimatorConfig;
using blockcov::Index;
using blockcov::Matrix;
using blockcov::ThresholdKind;
using blockcov::ThresholdRule;
using blockcov::Vector;

namespace {

Matrix random_symmetric(Index n, blockcov::RngStream& rng, double scale = 1.0) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      const double v = scale * (2.0 * rng.uniform01() - 1.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

}  // namespace

TEST_CASE("scalar rules satisfy the shrinkage axioms on a grid") {
  const std::vector<ThresholdRule> rules = {
      {ThresholdKind::hard},
      {ThresholdKind::soft},
      {ThresholdKind::adaptive_lasso, 1.0},
      {ThresholdKind::adaptive_lasso, 2.0},
      {ThresholdKind::adaptive_lasso, 3.5},
  };
  for (const auto& rule : rules)
    for (double z = -5.0; z <= 5.0; z += 0.25)
      for (double lambda = 0.0; lambda <= 3.0; lambda += 0.25) {
        const double t = blockcov::apply_rule(rule, z, lambda);
        CAPTURE(z);
        CAPTURE(lambda);
        CHECK(std::abs(t) <= std::abs(z) + 1e-15);
        if (std::abs(z) <= lambda) CHECK(t == 0.0);
        CHECK(std::abs(t - z) <= lambda + 1e-12);
      }
}

TEST_CASE("scalar rule formulas at pinned points") {
  CHECK(blockcov::apply_rule({ThresholdKind::hard}, 2.0, 1.0) == 2.0);
  CHECK(blockcov::apply_rule({ThresholdKind::hard}, 1.0, 1.0) == 0.0);
  CHECK(blockcov::apply_rule({ThresholdKind::soft}, 2.0, 0.5) == doctest::Approx(1.5));
  CHECK(blockcov::apply_rule({ThresholdKind::soft}, -2.0, 0.5) == doctest::Approx(-1.5));
  CHECK(blockcov::apply_rule({ThresholdKind::soft}, 0.25, 0.5) == 0.0);
  // z(1 - (lambda/z)^eta)+ with eta = 2: 2(1 - 0.25) = 1.5
  CHECK(blockcov::apply_rule({ThresholdKind::adaptive_lasso, 2.0}, 2.0, 1.0) ==
        doctest::Approx(1.5));
  CHECK(blockcov::apply_rule({ThresholdKind::adaptive_lasso, 1.0}, 2.0, 1.0) ==
        doctest::Approx(1.0));
  CHECK(blockcov::apply_rule({ThresholdKind::adaptive_lasso, 2.0}, -2.0, 1.0) ==
        doctest::Approx(-1.5));
  CHECK_THROWS_AS(blockcov::apply_rule({ThresholdKind::adaptive_lasso, 0.5}, 2.0, 1.0),
                  blockcov::ParameterError);
  CHECK_THROWS_AS(blockcov::apply_rule({ThresholdKind::hard}, 1.0, -0.1),
                  blockcov::ParameterError);
}

TEST_CASE("sample covariance matches a two-pass loop and pinned example") {
  Matrix data(2, 2);
  data << 1, 2, 3, 4;
  const Matrix cov = blockcov::sample_covariance(data);
  CHECK(cov(0, 0) == doctest::Approx(2.0));
  CHECK(cov(0, 1) == doctest::Approx(2.0));
  CHECK(cov(1, 0) == doctest::Approx(2.0));
  CHECK(cov(1, 1) == doctest::Approx(2.0));

  blockcov::RngStream rng(41, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 30);
    const Index p = 1 + static_cast<Index>(rng.next_u64() % 6);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    const Matrix fast = blockcov::sample_covariance(x);
    const Matrix slow = oracle::sample_covariance(x);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(bitwise_equal(fast, fast.transpose()));
  }

  CHECK_THROWS_AS(blockcov::sample_covariance(Matrix::Zero(1, 3)),
                  blockcov::InsufficientDataError);
  CHECK_THROWS_AS(blockcov::sample_covariance(Matrix::Zero(0, 3)),
                  blockcov::InsufficientDataError);
}

TEST_CASE("block thresholding zeroes a weak off-diagonal block at the default level") {
  // p = 4, k0 = 2, n = 100: the only off-diagonal block has norm 0.5 while
  // its threshold is 6 * sqrt(1 * 1) * sqrt((2 + ln 4) / 100) ~= 1.104.
  Matrix sigma_bar = Matrix::Identity(4, 4);
  sigma_bar(0, 2) = sigma_bar(2, 0) = 0.5;
  const BlockPartition part = blockcov::build_partition(4, 2);
  EstimatorConfig cfg;

  const Matrix hat = blockcov::block_threshold(sigma_bar, part, cfg, 100);
  CHECK(hat.isApprox(Matrix::Identity(4, 4), 0.0));

  // a small lambda0 leaves the block below threshold untouched
  EstimatorConfig keep = cfg;
  keep.lambda0 = 1.0;
  const Matrix kept = blockcov::block_threshold(sigma_bar, part, keep, 100);
  CHECK(bitwise_equal(kept, sigma_bar));
}

TEST_CASE("soft and adaptive lasso scale a kept block by the scalar rule") {
  Matrix sigma_bar = Matrix::Identity(4, 4);
  sigma_bar(0, 2) = sigma_bar(2, 0) = 2.0;
  const BlockPartition part = blockcov::build_partition(4, 2);
  const double lambda = 6.0 * std::sqrt((2.0 + std::log(4.0)) / 100.0);
  REQUIRE(lambda < 2.0);

  EstimatorConfig cfg;
  cfg.rule.kind = ThresholdKind::soft;
  Matrix hat = blockcov::block_threshold(sigma_bar, part, cfg, 100);
  CHECK(hat(0, 2) == doctest::Approx(2.0 - lambda).epsilon(1e-12));
  CHECK(hat(1, 3) == 0.0);

  cfg.rule.kind = ThresholdKind::adaptive_lasso;
  cfg.rule.eta = 2.0;
  hat = blockcov::block_threshold(sigma_bar, part, cfg, 100);
  CHECK(hat(0, 2) == doctest::Approx(2.0 * (1.0 - std::pow(lambda / 2.0, 2.0))).epsilon(1e-12));
}

TEST_CASE("blocks wider than n/ln n are zeroed regardless of their norm") {
  // n = 8: n / ln n ~= 3.85, so the 4x4 off-diagonal blocks must go.
  blockcov::RngStream rng(42, 0);
  Matrix sigma_bar = random_symmetric(8, rng, 5.0);
  const BlockPartition part = blockcov::build_partition(8, 4);
  EstimatorConfig cfg;
  cfg.lambda0 = 0.0;

  const Matrix hat = blockcov::block_threshold(sigma_bar, part, cfg, 8);
  Matrix expected = Matrix::Zero(8, 8);
  expected.block(0, 0, 4, 4) = sigma_bar.block(0, 0, 4, 4);
  expected.block(4, 4, 4, 4) = sigma_bar.block(4, 4, 4, 4);
  CHECK(bitwise_equal(hat, expected));
}

TEST_CASE("lambda0 = 0 with a large n keeps every block verbatim") {
  blockcov::RngStream rng(43, 0);
  const Matrix sigma_bar = random_symmetric(10, rng);
  const BlockPartition part = blockcov::build_partition(10, 2);
  EstimatorConfig cfg;
  cfg.lambda0 = 0.0;
  const Matrix hat = blockcov::block_threshold(sigma_bar, part, cfg, 100000);
  CHECK(bitwise_equal(hat, sigma_bar));
}

TEST_CASE("diagonal blocks survive bitwise and the output is exactly symmetric") {
  blockcov::RngStream rng(44, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.next_u64() % 24);
    const Index k0 =
        1 + static_cast<Index>(rng.next_u64() %
                               std::min<std::uint64_t>(5, static_cast<std::uint64_t>(p)));
    const Index n = 5 + static_cast<Index>(rng.next_u64() % 300);
    const Matrix sigma_bar = random_symmetric(p, rng);
    const BlockPartition part = blockcov::build_partition(p, k0);

    EstimatorConfig cfg;
    switch (trial % 3) {
      case 0: cfg.rule.kind = ThresholdKind::hard; break;
      case 1: cfg.rule.kind = ThresholdKind::soft; break;
      default:
        cfg.rule.kind = ThresholdKind::adaptive_lasso;
        cfg.rule.eta = 1.0 + rng.uniform01();
        break;
    }
    if (trial % 2) cfg.rule.norm = BlockNorm::frobenius;
    const Matrix hat = blockcov::block_threshold(sigma_bar, part, cfg, n);

    for (const blockcov::Block& b : part.blocks) {
      if (!b.diagonal) continue;
      for (Index i = b.rows.first - 1; i < b.rows.last; ++i)
        for (Index j = b.cols.first - 1; j < b.cols.last; ++j)
          CHECK(hat(i, j) == sigma_bar(i, j));
    }
    CHECK(bitwise_equal(hat, hat.transpose()));
  }
}

TEST_CASE("hard thresholding is idempotent") {
  blockcov::RngStream rng(45, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Index p = 6 + static_cast<Index>(rng.next_u64() % 15);
    const Matrix sigma_bar = random_symmetric(p, rng);
    const BlockPartition part = blockcov::build_partition(p, 2);
    EstimatorConfig cfg;
    const Matrix once = blockcov::block_threshold(sigma_bar, part, cfg, 50);
    const Matrix twice = blockcov::block_threshold(once, part, cfg, 50);
    CHECK(bitwise_equal(once, twice));
  }
}

TEST_CASE("block norm choice changes the kept/killed decision where the norms differ") {
  // off-diagonal block diag(0.6, 0.6): spectral norm 0.6, Frobenius ~0.849.
  // lambda0 = 3.9 puts the threshold (~0.718) between the two.
  Matrix sigma_bar = Matrix::Identity(4, 4);
  sigma_bar(0, 2) = sigma_bar(2, 0) = 0.6;
  sigma_bar(1, 3) = sigma_bar(3, 1) = 0.6;
  const BlockPartition part = blockcov::build_partition(4, 2);

  EstimatorConfig spectral_cfg;
  spectral_cfg.lambda0 = 3.9;
  const Matrix spectral_hat = blockcov::block_threshold(sigma_bar, part, spectral_cfg, 100);
  CHECK(spectral_hat(0, 2) == 0.0);

  EstimatorConfig frob_cfg = spectral_cfg;
  frob_cfg.rule.norm = BlockNorm::frobenius;
  const Matrix frob_hat = blockcov::block_threshold(sigma_bar, part, frob_cfg, 100);
  CHECK(frob_hat(0, 2) == 0.6);
}

TEST_CASE("block threshold input validation") {
  const BlockPartition part = blockcov::build_partition(4, 2);
  EstimatorConfig cfg;
  CHECK_THROWS_AS(blockcov::block_threshold(Matrix::Zero(3, 4), part, cfg, 10),
                  blockcov::DimensionError);
  CHECK_THROWS_AS(blockcov::block_threshold(Matrix::Zero(5, 5), part, cfg, 10),
                  blockcov::DimensionError);
  CHECK_THROWS_AS(blockcov::block_threshold(Matrix::Zero(4, 4), part, cfg, 1),
                  blockcov::InsufficientDataError);
  EstimatorConfig bad = cfg;
  bad.lambda0 = -1.0;
  CHECK_THROWS_AS(blockcov::block_threshold(Matrix::Zero(4, 4), part, bad, 10),
                  blockcov::ParameterError);
  EstimatorConfig bad_eta = cfg;
  bad_eta.rule.kind = ThresholdKind::adaptive_lasso;
  bad_eta.rule.eta = 0.5;
  CHECK_THROWS_AS(blockcov::block_threshold(Matrix::Zero(4, 4), part, bad_eta, 10),
                  blockcov::ParameterError);
}

TEST_CASE("psd projection clamps negative eigenvalues and fixes the rest") {
  Matrix sigma(2, 2);
  sigma << 1, 2, 2, 1;  // eigenvalues 3 and -1
  const Matrix proj = blockcov::psd_project(sigma, 0.0);
  Matrix expected(2, 2);
  expected << 1.5, 1.5, 1.5, 1.5;
  CHECK((proj - expected).cwiseAbs().maxCoeff() <= 1e-12);

  // already above the floor: returned unchanged, bit for bit
  blockcov::RngStream rng(46, 0);
  const Matrix base = random_symmetric(6, rng);
  const Matrix psd = base.transpose() * base + 0.5 * Matrix::Identity(6, 6);
  const Matrix same = blockcov::psd_project(psd, 0.1);
  CHECK(bitwise_equal(same, psd));

  CHECK_THROWS_AS(blockcov::psd_project(sigma, -0.5), blockcov::ParameterError);
  CHECK_THROWS_AS(blockcov::psd_project(Matrix::Zero(2, 3), 0.0), blockcov::DimensionError);
}

TEST_CASE("psd projection maps the spectrum through max(lambda, epsilon)") {
  blockcov::RngStream rng(47, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.next_u64() % 12);
    const Matrix a = random_symmetric(p, rng);
    const double eps = 0.05 * rng.uniform01();
    const Matrix proj = blockcov::psd_project(a, eps);

    Vector before = blockcov::sym_eigen(a).values;
    Vector after = blockcov::sym_eigen(proj).values;
    for (Index i = 0; i < p; ++i) before(i) = std::max(before(i), eps);
    std::sort(before.data(), before.data() + p);
    std::sort(after.data(), after.data() + p);
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(bitwise_equal(proj, proj.transpose()));
  }
}

TEST_CASE("precision estimate inverts the spectrum with a cap") {
  Matrix sigma = Matrix::Zero(3, 3);
  sigma(0, 0) = 2.0;
  sigma(1, 1) = 0.5;
  sigma(2, 2) = -1.0;
  const Matrix omega = blockcov::precision_estimate(sigma, 10.0);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 0.5;
  expected(1, 1) = 2.0;
  expected(2, 2) = 10.0;
  CHECK((omega - expected).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix tiny = Matrix::Identity(2, 2) * 0.05;
  CHECK((blockcov::precision_estimate(tiny, 10.0) - 10.0 * Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(blockcov::precision_estimate(sigma, 0.0), blockcov::ParameterError);
}

TEST_CASE("precision estimate is a true inverse on well-conditioned input") {
  blockcov::RngStream rng(48, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + static_cast<Index>(rng.next_u64() % 15);
    const Matrix m = random_symmetric(p, rng);
    const Matrix sigma = m.transpose() * m + Matrix::Identity(p, p);
    const Matrix omega = blockcov::precision_estimate(sigma, 1e9);
    CHECK(blockcov::spectral_norm(omega * sigma - Matrix::Identity(p, p)) <= 1e-6);
  }
}

TEST_CASE("end-to-end estimate improves on the raw sample covariance for identity truth") {
  const Index p = 20;
  const Index n = 200;
  std::vector<double> raw_losses, hat_losses;
  for (int seed = 0; seed < 100; ++seed) {
    const Matrix data =
        blockcov::sample_gaussian(Matrix::Identity(p, p), n, static_cast<std::uint64_t>(seed));
    const Matrix sigma_bar = blockcov::sample_covariance(data);
    const blockcov::EstimateResult res = blockcov::estimate(data, EstimatorConfig{});
    raw_losses.push_back(blockcov::spectral_norm(sigma_bar - Matrix::Identity(p, p)));
    hat_losses.push_back(blockcov::spectral_norm(res.sigma_hat - Matrix::Identity(p, p)));
  }
  CHECK(oracle::median(hat_losses) < oracle::median(raw_losses));
}

TEST_CASE("estimate wires its optional stages consistently") {
  const Matrix data = blockcov::sample_gaussian(Matrix::Identity(6, 6), 40, 99);
  EstimatorConfig cfg;
  cfg.epsilon_n = 0.01;
  const blockcov::EstimateResult res = blockcov::estimate(data, cfg);

  CHECK(bitwise_equal(res.sigma_hat_psd, blockcov::psd_project(res.sigma_hat, 0.01)));
  CHECK(bitwise_equal(res.omega_hat, blockcov::precision_estimate(res.sigma_hat, 40.0)));
  CHECK(blockcov::sym_eigen(res.sigma_hat_psd).values.minCoeff() >= 0.01 - 1e-8);

  EstimatorConfig capped = cfg;
  capped.inverse_cap = 5.0;
  const blockcov::EstimateResult res2 = blockcov::estimate(data, capped);
  CHECK(bitwise_equal(res2.omega_hat, blockcov::precision_estimate(res2.sigma_hat, 5.0)));

  CHECK_THROWS_AS(blockcov::estimate(Matrix::Zero(1, 4), EstimatorConfig{}),
                  blockcov::InsufficientDataError);
}
