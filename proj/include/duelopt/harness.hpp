#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duelopt/algorithms.hpp"
#include "duelopt/benchmarks.hpp"
#include "duelopt/borda.hpp"
#include "duelopt/oracle.hpp"

namespace duelopt {

/// A number given either absolutely or as a multiple of the oracle's
/// measured comparison bias. Written as 0.3 or as "0.125*zeta_hat".
struct BiasValue {
  double value = 1.0;
  bool relative = true;

  double resolve(double zeta_hat) const { return relative ? value * zeta_hat : value; }
  bool operator==(const BiasValue&) const = default;
};

struct PolicyEntry {
  std::string name;  // column value in the CSVs; defaults to the policy name
  AlgConfig alg;     // alg.l2 empty means "measure from the oracle"
  BiasValue zeta{1.0, true};
  BiasValue zeta0{0.125, true};
  BiasValue zeta_max{8.0, true};

  bool operator==(const PolicyEntry&) const = default;
};

struct CostPair {
  double label = 1.0;
  double comparison = 0.1;
  bool operator==(const CostPair&) const = default;
};

struct ExperimentConfig {
  Benchmark benchmark = Benchmark::CurrinExp;
  std::vector<PolicyEntry> policies;
  std::vector<double> budgets{25.0, 50.0, 75.0, 100.0};
  std::vector<CostPair> costs{CostPair{}};
  bool allow_equal_costs = false;
  int seeds = 20;
  std::uint64_t master_seed = 0;
  double warm_start = 10.0;
  double epsilon_heur = 1.0;
  int acq_evals_per_dim = 500;
  OracleOptions oracle;
  std::string output = "out";
  int workers = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Replaces the cost list by (1, 1/ratio) pairs; ratio 1 enables equal costs.
ExperimentConfig with_cost_ratios(ExperimentConfig config, const std::vector<double>& ratios);

struct RunKey {
  std::size_t policy = 0;
  std::size_t budget = 0;
  std::size_t cost = 0;
  int seed = 0;
};

/// h = splitmix64(master_seed ^ splitmix64(benchmark)), then
/// h = splitmix64(h ^ splitmix64(i)) for i = policy, budget, cost, seed index.
std::uint64_t run_seed(std::uint64_t master_seed, Benchmark benchmark, const RunKey& key);

/// Runs in the deterministic output order: policy, budget, cost, seed.
std::vector<RunKey> enumerate_runs(const ExperimentConfig& config);

struct AggregateRow {
  std::string benchmark;
  std::string policy;
  double budget = 0.0;
  double cost_ratio = 0.0;
  double label_cost = 0.0;
  double comp_cost = 0.0;
  double mean_regret = 0.0;
  double std_error = 0.0;
  int seeds = 0;
};

/// Mean and sample standard deviation / sqrt(n) of the values, summed in order.
AggregateRow aggregate(std::vector<double> final_regrets);

struct ExperimentResult {
  std::vector<RunKey> keys;
  std::vector<RunResult> runs;
  std::vector<AggregateRow> rows;
  OracleConstants constants;
};

/// Resolves "auto" settings of a policy entry against measured constants.
AlgConfig resolve_policy(const PolicyEntry& entry, const ExperimentConfig& config,
                         const OracleConstants& constants);

/// Runs every (policy, budget, cost, seed) combination. When `out_dir` is
/// set, it is created and both CSV files are opened before the first run;
/// failures there throw std::runtime_error.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir);

void write_steps_csv(std::ostream& out, const ExperimentConfig& config,
                     const ExperimentResult& result);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Accepts "currin"/"CurrinExp", "borehole", "synthetic1d" in any case.
Benchmark parse_benchmark_name(const std::string& name);

}  // namespace duelopt
