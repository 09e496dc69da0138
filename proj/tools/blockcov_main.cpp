#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockcov/experiments.hpp"
#include "blockcov/io.hpp"
#include "blockcov/rng.hpp"

namespace {

using blockcov::Index;
using blockcov::Matrix;
using ordered_json = nlohmann::ordered_json;

// Seed precedence: --seed flag, then BLOCKCOV_SEED, then 1.
std::uint64_t env_default_seed() {
  const char* env = std::getenv("BLOCKCOV_SEED");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw blockcov::ParameterError("BLOCKCOV_SEED must be an unsigned integer, got '" +
                                   std::string(env) + "'");
  return value;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw blockcov::CsvError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw blockcov::CsvError("write to '" + path + "' failed");
}

void write_matrix(const std::string& path, const Matrix& a) {
  if (path.empty()) {
    blockcov::write_matrix_csv(std::cout, a);
    return;
  }
  blockcov::write_matrix_csv(path, a);
}

ordered_json partition_to_json(const blockcov::BlockPartition& part) {
  ordered_json blocks = ordered_json::array();
  for (const blockcov::Block& b : part.blocks)
    blocks.push_back(ordered_json{{"row_start", b.rows.first},
                                  {"row_end", b.rows.last},
                                  {"col_start", b.cols.first},
                                  {"col_end", b.cols.last},
                                  {"level", b.level},
                                  {"diagonal", b.diagonal}});
  return blocks;
}

blockcov::ThresholdRule parse_rule(const std::string& rule, double eta,
                                   const std::string& block_norm) {
  blockcov::ThresholdRule out;
  if (rule == "hard")
    out.kind = blockcov::ThresholdKind::hard;
  else if (rule == "soft")
    out.kind = blockcov::ThresholdKind::soft;
  else if (rule == "alasso")
    out.kind = blockcov::ThresholdKind::adaptive_lasso;
  else
    throw blockcov::ParameterError("unknown rule '" + rule + "'");
  out.eta = eta;
  if (block_norm == "spectral")
    out.norm = blockcov::BlockNorm::spectral;
  else if (block_norm == "frobenius")
    out.norm = blockcov::BlockNorm::frobenius;
  else
    throw blockcov::ParameterError("unknown block norm '" + block_norm + "'");
  return out;
}

blockcov::ExperimentSpec parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw blockcov::ParameterError("cannot open config '" + path + "'");
  ordered_json config;
  try {
    config = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw blockcov::ParameterError("config '" + path + "' is not valid JSON: " + e.what());
  }

  try {
    blockcov::ExperimentSpec spec;

    const auto& model = config.at("model");
    const std::string kind = model.at("kind").get<std::string>();
    if (kind == "model1") {
      spec.model.kind = blockcov::CovarianceModel::Kind::model1;
      spec.model.rho = model.value("rho", 0.6);
    } else if (kind == "model2") {
      spec.model.kind = blockcov::CovarianceModel::Kind::model2;
    } else if (kind == "explicit") {
      spec.model.kind = blockcov::CovarianceModel::Kind::explicit_matrix;
      spec.model.matrix = blockcov::read_matrix_csv(model.at("path").get<std::string>());
    } else {
      throw blockcov::ParameterError("unknown model kind '" + kind + "'");
    }

    for (const auto& size : config.at("sizes")) {
      if (!size.is_array() || size.size() != 2)
        throw blockcov::ParameterError("each size must be an [n, p] pair");
      spec.sizes.push_back({size[0].get<Index>(), size[1].get<Index>()});
    }
    spec.reps = config.value("reps", 50);
    spec.seed = config.value("seed", std::uint64_t{1});

    if (config.contains("metrics")) {
      spec.metrics.clear();
      for (const auto& metric : config.at("metrics"))
        spec.metrics.push_back(blockcov::metric_from_name(metric.get<std::string>()));
    }

    for (const auto& method : config.at("methods")) {
      blockcov::MethodSpec ms;
      const std::string mkind = method.at("kind").get<std::string>();
      if (mkind == "blockthresh") {
        ms.kind = blockcov::MethodSpec::Kind::blockthresh;
        ms.config.lambda0 = method.value("lambda0", 6.0);
        ms.config.k0 = method.value("k0", Index{0});
        ms.config.rule = parse_rule(method.value("rule", std::string("hard")),
                                    method.value("eta", 1.0),
                                    method.value("block_norm", std::string("spectral")));
      } else if (mkind == "sample") {
        ms.kind = blockcov::MethodSpec::Kind::sample;
      } else if (mkind == "banding" || mkind == "tapering") {
        ms.kind = mkind == "banding" ? blockcov::MethodSpec::Kind::banding
                                     : blockcov::MethodSpec::Kind::tapering;
        const bool has_k = method.contains("k");
        const bool has_alpha = method.contains("alpha");
        if (has_k == has_alpha)
          throw blockcov::ParameterError(mkind + " method needs exactly one of k or alpha");
        if (has_k)
          ms.bandwidth = blockcov::BandwidthSpec::fixed(method.at("k").get<Index>());
        else
          ms.bandwidth = mkind == "banding"
                             ? blockcov::BandwidthSpec::banding(method.at("alpha").get<double>())
                             : blockcov::BandwidthSpec::tapering(method.at("alpha").get<double>());
      } else {
        throw blockcov::ParameterError("unknown method kind '" + mkind + "'");
      }
      ms.name = method.value("name", std::string());
      spec.methods.push_back(std::move(ms));
    }
    return spec;
  } catch (const ordered_json::exception& e) {
    throw blockcov::ParameterError("config '" + path + "': " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block thresholding covariance estimation toolkit"};
  app.require_subcommand(1);

  // partition
  auto* partition_cmd = app.add_subcommand("partition", "Emit the dyadic block partition as JSON");
  Index part_p = 0;
  Index part_k0 = 0;
  std::string part_output;
  partition_cmd->add_option("--p", part_p, "Matrix dimension")->required();
  partition_cmd->add_option("--k0", part_k0, "Base block size (default: max(1, floor(ln p)))");
  partition_cmd->add_option("--output", part_output, "Output path (default: stdout)");

  // estimate
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a covariance matrix from data");
  std::string est_input, est_output, est_partition_json;
  std::string est_method;
  std::string est_rule = "hard";
  std::string est_block_norm = "spectral";
  double est_lambda0 = 6.0, est_eta = 1.0, est_epsilon = 0.0, est_alpha = 0.0;
  Index est_k0 = 0, est_k = -1;
  bool est_psd = false, est_inverse = false;
  estimate_cmd->add_option("--input", est_input, "CSV of observations, one row per sample")
      ->required();
  estimate_cmd->add_option("--method", est_method, "blockthresh|sample|banding|tapering")
      ->required();
  estimate_cmd->add_option("--lambda0", est_lambda0, "Threshold scale (blockthresh)");
  estimate_cmd->add_option("--k0", est_k0, "Base block size, 0 = auto (blockthresh)");
  estimate_cmd->add_option("--rule", est_rule, "hard|soft|alasso (blockthresh)");
  estimate_cmd->add_option("--eta", est_eta, "Adaptive lasso exponent >= 1 (blockthresh)");
  estimate_cmd->add_option("--block-norm", est_block_norm, "spectral|frobenius (blockthresh)");
  estimate_cmd->add_flag("--psd", est_psd, "Clamp eigenvalues at --epsilon before output");
  estimate_cmd->add_option("--epsilon", est_epsilon, "Eigenvalue floor used by --psd");
  estimate_cmd->add_flag("--inverse", est_inverse, "Output the capped-inverse precision matrix");
  estimate_cmd->add_option("--k", est_k, "Fixed bandwidth (banding/tapering)");
  estimate_cmd->add_option("--alpha", est_alpha, "Rate-based bandwidth (banding/tapering)");
  estimate_cmd->add_option("--output", est_output, "Output CSV path (default: stdout)");
  estimate_cmd->add_option("--partition-json", est_partition_json,
                           "Also dump the partition used (blockthresh only)");

  // simulate
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Generate model covariances/data or run a Monte Carlo experiment");
  std::string sim_config, sim_output, sim_summary, sim_data;
  int sim_model = 0;
  Index sim_p = 0, sim_n = 0;
  double sim_rho = 0.6;
  int sim_jobs = 1;
  std::optional<std::uint64_t> sim_seed;
  simulate_cmd->add_option("--config", sim_config, "Experiment spec JSON (see README)");
  simulate_cmd->add_option("--model", sim_model, "Covariance model: 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  simulate_cmd->add_option("--p", sim_p, "Dimension (generation mode)");
  simulate_cmd->add_option("--rho", sim_rho, "model1 decay scale in (0,1)");
  simulate_cmd->add_option("--n", sim_n, "Also sample n observations (generation mode)");
  simulate_cmd->add_option("--data", sim_data, "Where to write sampled observations");
  simulate_cmd->add_option("--seed", sim_seed, "Base seed (default: BLOCKCOV_SEED or 1)");
  simulate_cmd->add_option("--output", sim_output,
                           "Covariance CSV (generation) or losses CSV (experiment)");
  simulate_cmd->add_option("--summary", sim_summary, "Summary CSV path (experiment mode)");
  simulate_cmd->add_option("--jobs", sim_jobs, "Worker threads (experiment mode)")
      ->check(CLI::PositiveNumber);

  // summarize
  auto* summarize_cmd = app.add_subcommand("summarize", "Quantile table from a losses CSV");
  std::string sum_input, sum_output;
  summarize_cmd->add_option("--input", sum_input, "Losses CSV from simulate")->required();
  summarize_cmd->add_option("--output", sum_output, "Output CSV path (default: stdout)");

  // check-class
  auto* class_cmd = app.add_subcommand(
      "check-class", "Test a covariance matrix for polynomial off-diagonal decay");
  std::string class_input;
  double class_alpha = 1.0, class_m = 1.0, class_m0 = 1.0;
  class_cmd->add_option("--input", class_input, "Covariance matrix CSV")->required();
  class_cmd->add_option("--alpha", class_alpha, "Decay exponent")->required();
  class_cmd->add_option("--M", class_m, "Tail constant")->required();
  class_cmd->add_option("--M0", class_m0, "Eigenvalue bound")->required();

  // check
  auto* check_cmd = app.add_subcommand("check", "Run an empirical verification suite");
  std::string check_suite;
  Index chk_p = 50, chk_n = 200, chk_k0 = 0, chk_max_p = 0, chk_max_k0 = 8;
  double chk_t = 1.01, chk_rho = 0.6, chk_alpha = 1.0;
  int chk_trials = 500, chk_draws = 50;
  std::optional<std::uint64_t> chk_seed;
  check_cmd->add_option("--suite", check_suite, "concentration|compression|blocknorm|partition")
      ->required();
  check_cmd->add_option("--p", chk_p, "Dimension (concentration/blocknorm)");
  check_cmd->add_option("--n", chk_n, "Sample size (concentration)");
  check_cmd->add_option("--k0", chk_k0, "Base block size, 0 = auto (concentration)");
  check_cmd->add_option("--t", chk_t, "Concentration slack factor > 1");
  check_cmd->add_option("--trials", chk_trials, "Trials (concentration/compression)");
  check_cmd->add_option("--draws", chk_draws, "Covariance draws (blocknorm)");
  check_cmd->add_option("--rho", chk_rho, "model1 decay scale (blocknorm)");
  check_cmd->add_option("--alpha", chk_alpha, "Decay exponent (blocknorm)");
  check_cmd->add_option("--max-p", chk_max_p, "Upper dimension bound (compression/partition)");
  check_cmd->add_option("--max-k0", chk_max_k0, "Upper base-size bound (partition)");
  check_cmd->add_option("--seed", chk_seed, "Base seed (default: BLOCKCOV_SEED or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(partition_cmd)) {
      const Index k0 = part_k0 > 0 ? part_k0 : blockcov::default_k0(part_p);
      const blockcov::BlockPartition part = blockcov::build_partition(part_p, k0);
      write_text(part_output, partition_to_json(part).dump(2) + "\n");
      return 0;
    }

    if (app.got_subcommand(estimate_cmd)) {
      const bool is_bandwidth_method = est_method == "banding" || est_method == "tapering";
      if (est_method != "blockthresh" && est_method != "sample" && !is_bandwidth_method) {
        std::cerr << "usage: --method must be blockthresh|sample|banding|tapering, got '"
                  << est_method << "'\n";
        return 2;
      }
      if (is_bandwidth_method && (est_k >= 0) == (est_alpha > 0)) {
        std::cerr << "usage: " << est_method << " needs exactly one of --k or --alpha\n";
        return 2;
      }
      if (!est_partition_json.empty() && est_method != "blockthresh") {
        std::cerr << "usage: --partition-json requires --method blockthresh\n";
        return 2;
      }

      const Matrix data = blockcov::read_matrix_csv(est_input);
      const Index n = data.rows();
      const Index p = data.cols();
      const Matrix sigma_bar = blockcov::sample_covariance(data);

      Matrix out;
      if (est_method == "sample") {
        out = sigma_bar;
      } else if (est_method == "blockthresh") {
        blockcov::EstimatorConfig config;
        config.lambda0 = est_lambda0;
        config.k0 = est_k0;
        config.rule = parse_rule(est_rule, est_eta, est_block_norm);
        config.epsilon_n = est_epsilon;
        const Index k0 = config.k0 > 0 ? config.k0 : blockcov::default_k0(p);
        const blockcov::BlockPartition part = blockcov::build_partition(p, k0);
        out = blockcov::block_threshold(sigma_bar, part, config, n);
        if (!est_partition_json.empty())
          write_text(est_partition_json, partition_to_json(part).dump(2) + "\n");
      } else {
        const blockcov::BandwidthSpec spec =
            est_k >= 0 ? blockcov::BandwidthSpec::fixed(est_k)
            : est_method == "banding" ? blockcov::BandwidthSpec::banding(est_alpha)
                                      : blockcov::BandwidthSpec::tapering(est_alpha);
        Index k = blockcov::select_bandwidth(spec, n, p);
        if (est_method == "tapering" && spec.mode != blockcov::BandwidthSpec::Mode::fixed)
          k = std::max<Index>(2, k);
        const Matrix weights = est_method == "banding" ? blockcov::banding_weights(p, k)
                                                       : blockcov::tapering_weights(p, k);
        out = blockcov::band_or_taper(sigma_bar, weights);
      }
      if (est_psd) out = blockcov::psd_project(out, est_epsilon);
      if (est_inverse) out = blockcov::precision_estimate(out, static_cast<double>(n));
      write_matrix(est_output, out);
      return 0;
    }

    if (app.got_subcommand(simulate_cmd)) {
      if (!sim_config.empty() && sim_model != 0) {
        std::cerr << "usage: --config and --model are mutually exclusive\n";
        return 2;
      }
      if (sim_config.empty() && sim_model == 0) {
        std::cerr << "usage: simulate needs either --config or --model\n";
        return 2;
      }

      if (!sim_config.empty()) {
        blockcov::ExperimentSpec spec = parse_experiment_config(sim_config);
        if (sim_seed) spec.seed = *sim_seed;
        else if (std::getenv("BLOCKCOV_SEED") != nullptr) spec.seed = env_default_seed();
        const blockcov::ExperimentResult result = blockcov::run_experiment(spec, sim_jobs);
        write_text(sim_output, blockcov::losses_csv(result));
        if (!sim_summary.empty())
          write_text(sim_summary, blockcov::summary_csv(blockcov::summarize(result)));
        return 0;
      }

      if (sim_p < 1) {
        std::cerr << "usage: generation mode needs --p >= 1\n";
        return 2;
      }
      const std::uint64_t seed = sim_seed ? *sim_seed : env_default_seed();
      const Matrix sigma = sim_model == 1 ? blockcov::generate_model1(sim_p, sim_rho, seed)
                                          : blockcov::generate_model2(sim_p, seed);
      write_matrix(sim_output, sigma);
      if (sim_n > 0 || !sim_data.empty()) {
        if (sim_n < 1 || sim_data.empty()) {
          std::cerr << "usage: sampling needs both --n >= 1 and --data\n";
          return 2;
        }
        const Matrix data =
            blockcov::sample_gaussian(sigma, sim_n, blockcov::mix_seed(seed, 1));
        blockcov::write_matrix_csv(sim_data, data);
      }
      return 0;
    }

    if (app.got_subcommand(summarize_cmd)) {
      std::ifstream in(sum_input);
      if (!in) throw blockcov::CsvError("cannot open '" + sum_input + "'");
      const blockcov::ExperimentResult result = blockcov::parse_losses_csv(in);
      write_text(sum_output, blockcov::summary_csv(blockcov::summarize(result)));
      return 0;
    }

    if (app.got_subcommand(class_cmd)) {
      const Matrix sigma = blockcov::read_matrix_csv(class_input);
      const blockcov::ClassCheck check =
          blockcov::check_class_membership(sigma, {class_alpha, class_m, class_m0});
      std::cout << "{\"in_class\": " << (check.in_class ? "true" : "false")
                << ", \"worst_k\": " << check.worst_k
                << ", \"tail_sup\": " << blockcov::format_double(check.tail_sup)
                << ", \"lambda_min\": " << blockcov::format_double(check.lambda_min)
                << ", \"lambda_max\": " << blockcov::format_double(check.lambda_max) << "}\n";
      return check.in_class ? 0 : 1;
    }

    if (app.got_subcommand(check_cmd)) {
      const std::uint64_t seed = chk_seed ? *chk_seed : env_default_seed();
      int violations = 0;
      if (check_suite == "concentration") {
        const blockcov::ConcentrationReport report =
            blockcov::concentration_suite(chk_p, chk_n, chk_t, chk_trials, seed, chk_k0);
        violations = report.violations;
        std::cout << "concentration: " << report.violations << "/" << report.trials
                  << " trials violated (failure bound "
                  << blockcov::format_double(report.bound) << " per trial)\n";
      } else if (check_suite == "compression") {
        const Index max_p = chk_max_p > 0 ? chk_max_p : 24;
        violations = blockcov::compression_suite(chk_trials, max_p, seed);
        std::cout << "compression: " << violations << "/" << chk_trials << " trials violated\n";
      } else if (check_suite == "blocknorm") {
        violations = blockcov::block_norm_bound_suite(chk_draws, chk_p, chk_rho, chk_alpha, seed);
        std::cout << "blocknorm: " << violations << " block violations over " << chk_draws
                  << " draws\n";
      } else if (check_suite == "partition") {
        const Index max_p = chk_max_p > 0 ? chk_max_p : 200;
        violations = blockcov::partition_suite(max_p, chk_max_k0);
        std::cout << "partition: " << violations << " violations (p <= " << max_p
                  << ", k0 <= " << chk_max_k0 << ")\n";
      } else {
        std::cerr << "usage: --suite must be concentration|compression|blocknorm|partition\n";
        return 2;
      }
      return violations == 0 ? 0 : 1;
    }
  } catch (const blockcov::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
