#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "duelopt/harness.hpp"
#include "duelopt/random.hpp"

using namespace duelopt;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"({"benchmark": "CurrinExp", "policies": ["GPUcb"]})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig tiny() {
  return load_config(fs::path(DUELOPT_TEST_DATA) / "tiny.json");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("duelopt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.seeds == 20);
  CHECK(c.warm_start == 10.0);
  CHECK(c.epsilon_heur == 1.0);
  CHECK(c.budgets == std::vector<double>{25.0, 50.0, 75.0, 100.0});
  REQUIRE(c.costs.size() == 1);
  CHECK(c.costs[0].label == 1.0);
  CHECK(c.costs[0].comparison == 0.1);
  CHECK(c.policies[0].name == "GPUcb");
  CHECK_FALSE(c.policies[0].alg.l2.has_value());
  CHECK(c.workers == 1);
}

TEST_CASE("config errors name the key") {
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"],
                     "costs": [{"label": 0.1, "comparison": 1}]})").find("costs[0]") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"],
                     "costs": [{"label": 1, "comparison": 1}]})").find("costs[0]") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "allow_equal_costs": true,
                     "costs": [{"label": 1, "comparison": 1}]})").empty());
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": [{"policy": "CompGpUcb", "gama": 1}]})")
            .find("policies[0].gama") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "oracle": {"lnk": "Probit"}})")
            .find("oracle.lnk") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp"})").find("policies") != std::string::npos);
  CHECK(error_of(R"({"policies": ["GPUcb"]})").find("benchmark") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "Branin", "policies": ["GPUcb"]})").find("benchmark") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["Random"]})").find("policies[0].policy") !=
        std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "budgets": [50, -1]})")
            .find("budgets[1]") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "budgets": [5]})")
            .find("budgets[0]") != std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "seeds": 0})").find("seeds") !=
        std::string::npos);
  CHECK(error_of(R"({"benchmark": "CurrinExp", "policies": [{"policy": "CompGpUcb", "zeta": "2*zeta"}]})")
            .find("policies[0].zeta") != std::string::npos);
  CHECK(error_of("{not json").find("JSON") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config round trip") {
  ExperimentConfig c = parse_config(R"({
    "benchmark": "Borehole",
    "policies": ["GPUcb",
                 {"policy": "CompGpUcbAdaptive", "name": "adaptive", "zeta0": "0.25*zeta_hat",
                  "zeta_max": 4.0, "gamma": 0.2, "l2": 0.07,
                  "beta_comp": {"mode": "Theoretical", "delta": 0.1},
                  "kernel_label": {"family": "Matern", "nu": 1.5},
                  "bounds_comp": {"scale_lo": 0.05}}],
    "budgets": [20, 40.5],
    "cost_ratios": [1, 3],
    "seeds": 4,
    "master_seed": 18446744073709551615,
    "oracle": {"link": "Probit", "temperature": 1.5, "eta": 0}
  })");
  CHECK(c.allow_equal_costs);
  CHECK(c.costs.size() == 2);
  CHECK(c.costs[1].comparison == 1.0 / 3.0);
  CHECK(c.policies[1].zeta0 == BiasValue{0.25, true});
  CHECK(c.policies[1].zeta_max == BiasValue{4.0, false});
  CHECK(c.policies[1].alg.l2 == 0.07);
  CHECK(c.oracle.eta == 0.0);
  CHECK(c.master_seed == 18446744073709551615ULL);

  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(serialize_config(back) == text);

  const ExperimentConfig m = parse_config(kMinimal);
  CHECK(parse_config(serialize_config(m)) == m);
}

TEST_CASE("cost ratio sweep configs") {
  const ExperimentConfig c = with_cost_ratios(parse_config(kMinimal), {1, 2, 5, 10});
  CHECK(c.allow_equal_costs);
  REQUIRE(c.costs.size() == 4);
  CHECK(c.costs[3].label == 1.0);
  CHECK(c.costs[3].comparison == 0.1);
  CHECK_THROWS_AS(with_cost_ratios(c, {0.5}), ConfigError);
  CHECK_THROWS_AS(with_cost_ratios(c, {}), ConfigError);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("benchmark names") {
  CHECK(parse_benchmark_name("currin") == Benchmark::CurrinExp);
  CHECK(parse_benchmark_name("CurrinExp") == Benchmark::CurrinExp);
  CHECK(parse_benchmark_name("BOREHOLE") == Benchmark::Borehole);
  CHECK_THROWS_AS(parse_benchmark_name("hartmann"), std::invalid_argument);
}

TEST_CASE("run enumeration and seed splitting") {
  ExperimentConfig c = parse_config(kMinimal);
  c.policies.push_back(c.policies[0]);
  c.budgets = {25, 50, 100};
  const std::vector<RunKey> keys = enumerate_runs(c);
  CHECK(keys.size() == 120);
  CHECK(keys[1].seed == 1);
  CHECK(keys[20].budget == 1);

  // Distinct seeds and distinct stream prefixes over a larger index space.
  c.costs = with_cost_ratios(c, {2, 3, 5, 10}).costs;
  c.seeds = 50;
  std::set<std::uint64_t> seeds;
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> prefixes;
  const auto all = enumerate_runs(c);
  for (const RunKey& k : all) {
    const std::uint64_t s = run_seed(c.master_seed, c.benchmark, k);
    seeds.insert(s);
    Rng rng(s);
    const std::uint64_t a = rng.next(), b = rng.next(), d = rng.next();
    prefixes.insert({a, b, d});
  }
  CHECK(seeds.size() == all.size());
  CHECK(prefixes.size() == all.size());
  CHECK(run_seed(1, Benchmark::CurrinExp, all[0]) != run_seed(2, Benchmark::CurrinExp, all[0]));
  CHECK(run_seed(1, Benchmark::CurrinExp, all[0]) != run_seed(1, Benchmark::Borehole, all[0]));
}

TEST_CASE("aggregate statistics") {
  const AggregateRow r = aggregate({1.0, 2.0, 4.0});
  CHECK(r.mean_regret == doctest::Approx(7.0 / 3.0));
  const double sd = std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                               (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0);
  CHECK(r.std_error == doctest::Approx(sd / std::sqrt(3.0)));
  CHECK(r.seeds == 3);
  CHECK(aggregate({0.5}).std_error == 0.0);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(100.0) == "100");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("experiment output is deterministic and recomputable") {
  const ExperimentConfig c = tiny();
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const ExperimentResult ra = run_experiment(c, a);
  ExperimentConfig parallel = c;
  parallel.workers = 3;
  run_experiment(parallel, b);
  CHECK(ra.keys.size() == 12);
  CHECK(ra.rows.size() == 4);
  CHECK(read_file(a / "steps.csv") == read_file(b / "steps.csv"));
  CHECK(read_file(a / "aggregate.csv") == read_file(b / "aggregate.csv"));

  // Recompute the aggregate rows from the per-step file.
  std::ifstream steps(a / "steps.csv");
  std::string line;
  std::getline(steps, line);
  CHECK(line == "#schema=duelopt-steps-v1");
  std::getline(steps, line);
  const std::vector<std::string> header = split(line);
  CHECK(header.front() == "benchmark");
  CHECK(header.back() == "simple_regret");
  std::map<std::string, std::map<int, double>> finals;
  std::vector<std::string> order;
  std::set<std::string> groups;
  while (std::getline(steps, line)) {
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    const std::string key = cells[1] + "," + cells[2] + "," + cells[3] + "," + cells[4];
    if (!finals.count(key)) order.push_back(key);
    finals[key][std::stoi(cells[5])] = std::stod(cells.back());
    groups.insert(key + "," + cells[5]);
  }
  CHECK(groups.size() == 12);

  std::ifstream agg(a / "aggregate.csv");
  std::getline(agg, line);
  CHECK(line == "#schema=duelopt-aggregate-v1");
  std::getline(agg, line);
  std::size_t row = 0;
  while (std::getline(agg, line)) {
    const auto cells = split(line);
    REQUIRE(row < order.size());
    std::vector<double> v;
    for (const auto& [seed, val] : finals[order[row]]) v.push_back(val);
    const AggregateRow expect = aggregate(v);
    CHECK(cells[6] == format_double(expect.mean_regret));
    CHECK(cells[7] == format_double(expect.std_error));
    CHECK(cells[8] == std::to_string(c.seeds));
    ++row;
  }
  CHECK(row == 4);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep rows and budget conservation") {
  const ExperimentConfig c = with_cost_ratios(tiny(), {1, 2, 10});
  const ExperimentResult r = run_experiment(c, std::nullopt);
  CHECK(r.rows.size() == c.policies.size() * c.budgets.size() * 3);
  for (std::size_t i = 0; i < r.keys.size(); ++i) {
    const RunKey& k = r.keys[i];
    const CostModel m{c.costs[k.cost].label, c.costs[k.cost].comparison, c.budgets[k.budget]};
    const QueryBounds nb = n_bounds(m);
    const RunResult& run = r.runs[i];
    CHECK(run.spent <= m.budget + 1e-9);
    CHECK(run.labels + run.comparisons >= nb.n_lower - 1);
    CHECK(run.labels + run.comparisons <= nb.n_upper);
  }
}

TEST_CASE("unwritable output fails before running") {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  CHECK_THROWS_AS(run_experiment(tiny(), blocker / "sub"), std::runtime_error);
  fs::remove_all(blocker);
}

TEST_CASE("command line tool") {
  const fs::path out = scratch("cli");
  const std::string cli = DUELOPT_CLI;
  const std::string cfg = (fs::path(DUELOPT_TEST_DATA) / "tiny.json").string();
  CHECK(std::system((cli + " run --config " + cfg + " --out " + out.string() + " > /dev/null").c_str()) == 0);
  CHECK(fs::exists(out / "steps.csv"));
  CHECK(fs::exists(out / "aggregate.csv"));

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"benchmark": "CurrinExp", "policies": ["GPUcb"], "sedes": 3})";
  CHECK(std::system((cli + " run --config " + bad.string() + " 2> /dev/null").c_str()) != 0);
  CHECK(std::system((cli + " sweep-ratio --config " + cfg + " --ratios 1,x 2> /dev/null").c_str()) != 0);
  CHECK(std::system((cli + " frobnicate 2> /dev/null > /dev/null").c_str()) != 0);
  fs::remove_all(out);
}
