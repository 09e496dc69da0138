#include "blockcov/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "blockcov/io.hpp"
#include "blockcov/rng.hpp"

namespace blockcov {

Matrix CovarianceModel::draw(Index p, std::uint64_t seed) const {
  switch (kind) {
    case Kind::model1: return generate_model1(p, rho, seed);
    case Kind::model2: return generate_model2(p, seed);
    case Kind::explicit_matrix:
      if (matrix.rows() != p || matrix.cols() != p)
        throw DimensionError("CovarianceModel: explicit matrix is " +
                             std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()) +
                             " but the experiment asks for p=" + std::to_string(p));
      return matrix;
  }
  throw ParameterError("CovarianceModel: unknown kind");
}

std::string MethodSpec::label() const {
  if (!name.empty()) return name;
  switch (kind) {
    case Kind::blockthresh: return "blockthresh";
    case Kind::sample: return "sample";
    case Kind::banding:
      return bandwidth.mode == BandwidthSpec::Mode::fixed
                 ? "banding(k=" + std::to_string(bandwidth.k) + ")"
                 : "banding(alpha=" + format_double(bandwidth.alpha) + ")";
    case Kind::tapering:
      return bandwidth.mode == BandwidthSpec::Mode::fixed
                 ? "tapering(k=" + std::to_string(bandwidth.k) + ")"
                 : "tapering(alpha=" + format_double(bandwidth.alpha) + ")";
  }
  return "unknown";
}

const char* metric_name(LossMetric metric) {
  switch (metric) {
    case LossMetric::spectral: return "spectral";
    case LossMetric::frobenius: return "frobenius";
    case LossMetric::l1: return "l1";
  }
  return "unknown";
}

LossMetric metric_from_name(const std::string& name) {
  if (name == "spectral") return LossMetric::spectral;
  if (name == "frobenius") return LossMetric::frobenius;
  if (name == "l1") return LossMetric::l1;
  throw ParameterError("unknown loss metric '" + name + "'");
}

namespace {

Matrix fit_method(const MethodSpec& method, const Matrix& sigma_bar, Index n, Index p) {
  switch (method.kind) {
    case MethodSpec::Kind::sample:
      return sigma_bar;
    case MethodSpec::Kind::blockthresh: {
      const Index k0 = method.config.k0 > 0 ? method.config.k0 : default_k0(p);
      return block_threshold(sigma_bar, build_partition(p, k0), method.config, n);
    }
    case MethodSpec::Kind::banding: {
      const Index k = select_bandwidth(method.bandwidth, n, p);
      return band_or_taper(sigma_bar, banding_weights(p, k));
    }
    case MethodSpec::Kind::tapering: {
      const Index k = std::max<Index>(2, select_bandwidth(method.bandwidth, n, p));
      return band_or_taper(sigma_bar, tapering_weights(p, k));
    }
  }
  throw ParameterError("unknown method kind");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs) {
  if (spec.sizes.empty()) throw ParameterError("run_experiment: no sizes");
  if (spec.reps < 1) throw ParameterError("run_experiment: reps must be >= 1");
  if (spec.methods.empty()) throw ParameterError("run_experiment: no methods");
  if (spec.metrics.empty()) throw ParameterError("run_experiment: no metrics");
  if (jobs < 1) throw ParameterError("run_experiment: jobs must be >= 1");
  for (const SizePair& size : spec.sizes)
    if (size.n < 2 || size.p < 1)
      throw ParameterError("run_experiment: sizes need n >= 2 and p >= 1");

  const std::size_t n_sizes = spec.sizes.size();
  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_metrics = spec.metrics.size();
  const std::size_t reps = static_cast<std::size_t>(spec.reps);
  const std::size_t total_tasks = n_sizes * reps;

  // losses[(size, method, metric)][rep]
  std::vector<double> losses(n_sizes * n_methods * n_metrics * reps, 0.0);
  const auto slot = [&](std::size_t s, std::size_t m, std::size_t k, std::size_t r) {
    return ((s * n_methods + m) * n_metrics + k) * reps + r;
  };

  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::string failure;

  const auto run_task = [&](std::size_t task) {
    const std::size_t s = task / reps;
    const std::size_t r = task % reps;
    const auto [n, p] = spec.sizes[s];
    const std::uint64_t sigma_seed = mix_seed(spec.seed, 2 * task);
    const std::uint64_t data_seed = mix_seed(spec.seed, 2 * task + 1);
    try {
      const Matrix sigma = spec.model.draw(p, sigma_seed);
      const Matrix data = sample_gaussian(sigma, n, data_seed);
      const Matrix sigma_bar = sample_covariance(data);
      for (std::size_t m = 0; m < n_methods; ++m) {
        const Matrix fitted = fit_method(spec.methods[m], sigma_bar, n, p);
        for (std::size_t k = 0; k < n_metrics; ++k)
          losses[slot(s, m, k, r)] = loss(fitted, sigma, spec.metrics[k]);
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failed.exchange(true))
        failure = "replicate " + std::to_string(r) + " at n=" + std::to_string(n) +
                  ", p=" + std::to_string(p) + " (sigma seed " + std::to_string(sigma_seed) +
                  ", data seed " + std::to_string(data_seed) + ") failed: " + e.what();
    }
  };

  const auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= total_tasks) break;
      run_task(task);
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(jobs), total_tasks);
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw Error("experiment", failure);

  ExperimentResult result;
  result.series.reserve(n_sizes * n_methods * n_metrics);
  for (std::size_t s = 0; s < n_sizes; ++s)
    for (std::size_t m = 0; m < n_methods; ++m)
      for (std::size_t k = 0; k < n_metrics; ++k) {
        LossSeries series;
        series.method = spec.methods[m].label();
        series.n = spec.sizes[s].n;
        series.p = spec.sizes[s].p;
        series.metric = spec.metrics[k];
        series.losses.assign(losses.begin() + static_cast<std::ptrdiff_t>(slot(s, m, k, 0)),
                             losses.begin() + static_cast<std::ptrdiff_t>(slot(s, m, k, 0)) +
                                 static_cast<std::ptrdiff_t>(reps));
        result.series.push_back(std::move(series));
      }
  return result;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile: empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  if (result.series.empty()) throw ParameterError("summarize: empty result");
  std::vector<SummaryRow> rows;
  rows.reserve(result.series.size());
  for (const LossSeries& series : result.series) {
    if (series.losses.empty()) throw ParameterError("summarize: series with no losses");
    SummaryRow row;
    row.method = series.method;
    row.n = series.n;
    row.p = series.p;
    row.metric = series.metric;
    row.count = static_cast<int>(series.losses.size());
    double sum = 0;
    for (double x : series.losses) sum += x;
    row.mean = sum / row.count;
    double ss = 0;
    for (double x : series.losses) ss += (x - row.mean) * (x - row.mean);
    row.se = row.count > 1 ? std::sqrt(ss / (row.count - 1)) / std::sqrt(double(row.count)) : 0.0;
    row.min = *std::min_element(series.losses.begin(), series.losses.end());
    row.max = *std::max_element(series.losses.begin(), series.losses.end());
    row.q1 = quantile(series.losses, 0.25);
    row.median = quantile(series.losses, 0.5);
    row.q3 = quantile(series.losses, 0.75);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string losses_csv(const ExperimentResult& result) {
  std::string out = "method,n,p,metric,rep,loss\n";
  for (const LossSeries& series : result.series)
    for (std::size_t r = 0; r < series.losses.size(); ++r) {
      out += series.method;
      out += ',' + std::to_string(series.n) + ',' + std::to_string(series.p);
      out += ',';
      out += metric_name(series.metric);
      out += ',' + std::to_string(r) + ',' + format_double(series.losses[r]) + '\n';
    }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,n,p,metric,count,mean,se,min,q1,median,q3,max\n";
  for (const SummaryRow& row : rows) {
    out += row.method;
    out += ',' + std::to_string(row.n) + ',' + std::to_string(row.p) + ',';
    out += metric_name(row.metric);
    out += ',' + std::to_string(row.count);
    for (double v : {row.mean, row.se, row.min, row.q1, row.median, row.q3, row.max})
      out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

ExperimentResult parse_losses_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty losses table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "method,n,p,metric,rep,loss")
    throw CsvError("unexpected losses header '" + line + "'");

  ExperimentResult result;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 6)
      throw CsvError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                     std::to_string(fields.size()));
    const std::string& method = fields[0];
    Index n = 0, p = 0;
    std::size_t rep = 0;
    LossMetric metric = LossMetric::spectral;
    double value = 0;
    try {
      n = static_cast<Index>(std::stoll(fields[1]));
      p = static_cast<Index>(std::stoll(fields[2]));
      metric = metric_from_name(fields[3]);
      rep = static_cast<std::size_t>(std::stoull(fields[4]));
      char* end = nullptr;
      value = std::strtod(fields[5].c_str(), &end);
      if (end != fields[5].c_str() + fields[5].size())
        throw ParameterError("bad loss '" + fields[5] + "'");
    } catch (const std::exception& e) {
      throw CsvError("line " + std::to_string(line_no) + ": " + e.what());
    }

    LossSeries* series = nullptr;
    for (LossSeries& s : result.series)
      if (s.method == method && s.n == n && s.p == p && s.metric == metric) {
        series = &s;
        break;
      }
    if (series == nullptr) {
      result.series.push_back({method, n, p, metric, {}});
      series = &result.series.back();
    }
    if (series->losses.size() <= rep) series->losses.resize(rep + 1, 0.0);
    series->losses[rep] = value;
  }
  if (result.series.empty()) throw CsvError("losses table has no data rows");
  return result;
}

// ---- empirical guarantee suites ----

namespace {

struct BlockDeviation {
  double worst_ratio;      // max over blocks of deviation / bound
  double worst_deviation;  // max over blocks of raw deviation
};

BlockDeviation identity_block_deviation(const Matrix& sigma_bar, const BlockPartition& part,
                                        double c0t, Index n) {
  const double log_p = std::log(static_cast<double>(part.p));
  BlockDeviation out{0.0, 0.0};
  for (const Block& b : part.blocks) {
    if (b.cols.first < b.rows.first) continue;  // symmetric, mirrors add nothing
    Matrix diff = sigma_bar.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(),
                                  b.cols.size());
    if (b.diagonal)
      diff -= Matrix::Identity(b.rows.size(), b.cols.size());
    const double deviation = spectral_norm(diff);
    const double bound =
        c0t * std::sqrt((static_cast<double>(b.dim()) + log_p) / static_cast<double>(n));
    out.worst_ratio = std::max(out.worst_ratio, deviation / bound);
    out.worst_deviation = std::max(out.worst_deviation, deviation);
  }
  return out;
}

}  // namespace

ConcentrationReport concentration_suite(Index p, Index n, double t, int trials,
                                        std::uint64_t seed, Index k0) {
  if (!(t > 1)) throw ParameterError("concentration_suite: t must be > 1");
  if (trials < 1) throw ParameterError("concentration_suite: trials must be >= 1");
  constexpr double c0 = 5.44;
  const BlockPartition part = build_partition(p, k0 > 0 ? k0 : default_k0(p));
  const Matrix identity = Matrix::Identity(p, p);

  ConcentrationReport report;
  report.trials = trials;
  report.bound = std::pow(static_cast<double>(p), -(6.0 * t * t - 2.0));
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix data = sample_gaussian(identity, n, mix_seed(seed, static_cast<std::uint64_t>(trial)));
    const Matrix sigma_bar = sample_covariance(data);
    const BlockDeviation dev = identity_block_deviation(sigma_bar, part, c0 * t, n);
    if (dev.worst_ratio >= 1.0) ++report.violations;
  }
  return report;
}

double concentration_median_deviation(Index p, Index n, int trials, std::uint64_t seed,
                                      Index k0) {
  if (trials < 1) throw ParameterError("concentration_median_deviation: trials must be >= 1");
  const BlockPartition part = build_partition(p, k0 > 0 ? k0 : default_k0(p));
  const Matrix identity = Matrix::Identity(p, p);
  std::vector<double> deviations;
  deviations.reserve(static_cast<std::size_t>(trials));
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix data = sample_gaussian(identity, n, mix_seed(seed, static_cast<std::uint64_t>(trial)));
    const Matrix sigma_bar = sample_covariance(data);
    deviations.push_back(identity_block_deviation(sigma_bar, part, 1.0, n).worst_deviation);
  }
  return median(std::move(deviations));
}

int compression_suite(int trials, Index max_p, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("compression_suite: trials must be >= 1");
  if (max_p < 2) throw ParameterError("compression_suite: max_p must be >= 2");
  int violations = 0;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng(seed, static_cast<std::uint64_t>(trial));
    const Index p = 2 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(max_p - 1));
    Matrix a(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = i; j < p; ++j) {
        const double v = 2.0 * rng.uniform01() - 1.0;
        a(i, j) = v;
        a(j, i) = v;
      }
    std::vector<Index> sizes;
    Index remaining = p;
    while (remaining > 0) {
      const Index s = 1 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(remaining));
      sizes.push_back(s);
      remaining -= s;
    }
    if (spectral_norm(a) > spectral_norm(norm_compression(a, sizes)) + 1e-10) ++violations;
  }
  return violations;
}

int block_norm_bound_suite(int draws, Index p, double rho, double alpha, std::uint64_t seed) {
  if (draws < 1) throw ParameterError("block_norm_bound_suite: draws must be >= 1");
  const Index k0 = default_k0(p);
  const BlockPartition part = build_partition(p, k0);
  int violations = 0;
  for (int draw = 0; draw < draws; ++draw) {
    const Matrix sigma = generate_model1(p, rho, mix_seed(seed, static_cast<std::uint64_t>(draw)));
    // Certify the decay constant of this draw, then test the blockwise bound.
    const ClassCheck check = check_class_membership(sigma, {alpha, 1.0, 1.0});
    const double certified_m = check.tail_sup;
    for (const Block& b : part.blocks) {
      if (b.dim() < 2 * k0) continue;
      const double norm = spectral_norm(
          sigma.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size()));
      const double bound = certified_m * std::pow(static_cast<double>(b.dim()), -alpha);
      if (norm > bound + 1e-10) ++violations;
    }
  }
  return violations;
}

std::vector<std::string> partition_violations(const BlockPartition& part) {
  std::vector<std::string> issues;
  const Index p = part.p;
  const Index k0 = part.k0;
  const auto complain = [&issues, p, k0](const std::string& what) {
    issues.push_back("p=" + std::to_string(p) + " k0=" + std::to_string(k0) + ": " + what);
  };
  if (p < 1 || k0 < 1 || k0 > p) {
    complain("invalid dimensions");
    return issues;
  }
  const auto describe = [](const Block& b) {
    return "[" + std::to_string(b.rows.first) + "," + std::to_string(b.rows.last) + "]x[" +
           std::to_string(b.cols.first) + "," + std::to_string(b.cols.last) + "]@" +
           std::to_string(b.level);
  };

  const Index m = (p + k0 - 1) / k0;
  if (static_cast<Index>(part.blocks.size()) > m * m)
    complain("more blocks than k0-cells: " + std::to_string(part.blocks.size()));

  std::vector<int> cover(static_cast<std::size_t>(p * p), 0);
  std::set<std::tuple<Index, Index, Index, Index, int>> rects;
  for (const Block& b : part.blocks) {
    if (b.rows.first < 1 || b.rows.last > p || b.rows.first > b.rows.last ||
        b.cols.first < 1 || b.cols.last > p || b.cols.first > b.cols.last) {
      complain("block out of range " + describe(b));
      continue;
    }
    if (b.level < 1) complain("bad level " + describe(b));
    if ((b.rows.first - 1) % k0 != 0 || (b.cols.first - 1) % k0 != 0)
      complain("block not k0-aligned " + describe(b));

    const Index nominal = (Index{1} << (b.level - 1)) * k0;
    if (b.rows.size() > nominal || b.cols.size() > nominal)
      complain("block larger than its level allows " + describe(b));
    if ((b.rows.size() != nominal || b.cols.size() != nominal) &&
        b.rows.last != p && b.cols.last != p)
      complain("non-truncated block with wrong size " + describe(b));

    const bool on_diagonal = b.rows == b.cols;
    if (b.diagonal != on_diagonal) complain("wrong diagonal flag " + describe(b));
    if (on_diagonal && (b.level != 1 || b.rows.size() > k0))
      complain("diagonal block must be a level-1 k0 cell " + describe(b));
    if (!on_diagonal && b.rows.first <= b.cols.last && b.cols.first <= b.rows.last)
      complain("off-diagonal block straddles the diagonal " + describe(b));

    if (b.dim() >= 4 * k0) {
      const Index gap = b.cols.first > b.rows.last ? b.cols.first - b.rows.last
                                                   : b.rows.first - b.cols.last;
      if (gap < b.dim())
        complain("separation " + std::to_string(gap) + " below d(B)=" +
                 std::to_string(b.dim()) + " " + describe(b));
    }

    for (Index i = b.rows.first; i <= b.rows.last; ++i)
      for (Index j = b.cols.first; j <= b.cols.last; ++j)
        ++cover[static_cast<std::size_t>((i - 1) * p + (j - 1))];
    rects.insert({b.rows.first, b.rows.last, b.cols.first, b.cols.last, b.level});
  }

  Index missed = 0, doubled = 0;
  for (int c : cover) {
    if (c == 0) ++missed;
    if (c > 1) ++doubled;
  }
  if (missed > 0) complain(std::to_string(missed) + " cells uncovered");
  if (doubled > 0) complain(std::to_string(doubled) + " cells covered more than once");

  for (const Block& b : part.blocks)
    if (!rects.contains({b.cols.first, b.cols.last, b.rows.first, b.rows.last, b.level}))
      complain("mirror missing for " + describe(b));

  return issues;
}

int partition_suite(Index max_p, Index max_k0) {
  if (max_p < 1 || max_k0 < 1) throw ParameterError("partition_suite: bounds must be >= 1");
  int violations = 0;
  for (Index p = 1; p <= max_p; ++p)
    for (Index k0 = 1; k0 <= std::min(max_k0, p); ++k0)
      violations += static_cast<int>(partition_violations(build_partition(p, k0)).size());
  return violations;
}

}  // namespace blockcov
