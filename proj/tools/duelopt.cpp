#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "duelopt/borda.hpp"
#include "duelopt/harness.hpp"
#include "duelopt/oracle.hpp"
#include "duelopt/random.hpp"
#include "duelopt/sampling.hpp"

using namespace duelopt;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

void print_rows(const std::vector<AggregateRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-20s budget=%-6s ratio=%-6s mean=%.6g se=%.3g n=%d\n", r.policy.c_str(),
                format_double(r.budget).c_str(), format_double(r.cost_ratio).c_str(),
                r.mean_regret, r.std_error, r.seeds);
  }
}

int cmd_run(const std::string& config_path, const std::string& out, std::optional<int> workers,
            std::optional<std::uint64_t> master_seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (workers) cfg.workers = *workers;
  if (master_seed) cfg.master_seed = *master_seed;
  cfg.validate();
  const std::filesystem::path dir(out.empty() ? cfg.output : out);
  const ExperimentResult res = run_experiment(cfg, dir);
  std::printf("zeta_hat=%.6g L1_hat=%.6g L2_hat=%.6g\n", res.constants.zeta_hat,
              res.constants.l1_hat, res.constants.l2_hat);
  print_rows(res.rows);
  std::printf("wrote %s and %s\n", (dir / "steps.csv").string().c_str(),
              (dir / "aggregate.csv").string().c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& ratios, const std::string& out,
              std::optional<int> workers) {
  ExperimentConfig cfg = with_cost_ratios(load_config(config_path), parse_list(ratios));
  if (workers) cfg.workers = *workers;
  cfg.validate();
  const std::filesystem::path dir(out.empty() ? cfg.output : out);
  const ExperimentResult res = run_experiment(cfg, dir);
  print_rows(res.rows);
  std::printf("wrote %s\n", (dir / "aggregate.csv").string().c_str());
  return 0;
}

int cmd_verify(const std::string& name, int grid, int points, int draws, std::uint64_t seed) {
  const Benchmark b = parse_benchmark_name(name);
  const DuelingOracle oracle = make_benchmark_oracle(b);
  std::printf("benchmark=%s link=%s temperature=%.6g eta=%.6g\n", std::string(to_string(b)).c_str(),
              std::string(to_string(oracle.link().family)).c_str(), oracle.link().temperature,
              oracle.eta());
  std::printf("f*=%.10g fc*=%.10g\n", oracle.target_optimum().value,
              oracle.comparison_optimum().value);

  const BordaTruth bt(oracle);
  const Eigen::MatrixXd g = domain_grid(oracle.domain(), grid);
  const double zeta = verify_assumption1(oracle, g);
  const LipschitzEstimate l = verify_assumption2(bt, g);
  std::printf("zeta_hat=%.6g L1_hat=%.6g L2_hat=%.6g fr*=%.6g\n", zeta, l.l1_hat, l.l2_hat,
              bt.optimum_value());

  Rng rng(seed);
  const BoxDomain& dom = oracle.domain();
  int inside = 0;
  for (int i = 0; i < points; ++i) {
    const Eigen::VectorXd x = rng.uniform_point(dom.lower(), dom.upper());
    long long wins = 0;
    for (int k = 0; k < draws; ++k) {
      wins += compare(oracle, x, rng.uniform_point(dom.lower(), dom.upper()), rng);
    }
    const double freq = static_cast<double>(wins) / draws;
    const double truth = bt.value(x);
    const double se = std::sqrt(std::max(truth * (1.0 - truth), 1e-12) / draws);
    const bool ok = std::abs(freq - truth) <= 3.0 * se;
    inside += ok;
    std::printf("  point %2d  borda=%.5f  empirical=%.5f  |diff|/se=%.2f %s\n", i, truth, freq,
                std::abs(freq - truth) / se, ok ? "ok" : "OUTSIDE");
  }
  std::printf("borda unbiasedness: %d/%d points within 3 standard errors\n", inside, points);
  return inside == points ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dueling-choice Bayesian optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> master_seed;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config and write CSVs");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", out, "Output directory (default: config 'output')");
  run_cmd->add_option("--workers", workers, "Concurrent runs");
  run_cmd->add_option("--master-seed", master_seed, "Override the master seed");

  std::string ratios = "1,2,5,10";
  auto* sweep_cmd = app.add_subcommand("sweep-ratio", "Sweep label/comparison cost ratios");
  sweep_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep_cmd->add_option("--ratios", ratios, "Comma-separated cost ratios")->capture_default_str();
  sweep_cmd->add_option("--out", out, "Output directory");
  sweep_cmd->add_option("--workers", workers, "Concurrent runs");

  std::string bench = "currin";
  int grid = 50;
  int points = 20;
  int draws = 100000;
  std::uint64_t seed = 1;
  auto* verify_cmd = app.add_subcommand("verify-oracle", "Check modeling assumptions of a benchmark");
  verify_cmd->add_option("--benchmark", bench, "currin, borehole or synthetic1d")->capture_default_str();
  verify_cmd->add_option("--grid", grid, "Grid points per axis")->capture_default_str();
  verify_cmd->add_option("--points", points, "Random points for the Borda check")->capture_default_str();
  verify_cmd->add_option("--draws", draws, "Comparisons per point")->capture_default_str();
  verify_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(config_path, out, workers, master_seed);
    if (*sweep_cmd) return cmd_sweep(config_path, ratios, out, workers);
    if (*verify_cmd) return cmd_verify(bench, grid, points, draws, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "duelopt: %s\n", e.what());
    return 2;
  }
  return 0;
}
