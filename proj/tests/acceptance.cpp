// Acceptance checks 1-12. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "duelopt/algorithms.hpp"
#include "duelopt/benchmarks.hpp"
#include "duelopt/borda.hpp"
#include "duelopt/direct.hpp"
#include "duelopt/gp.hpp"
#include "duelopt/harness.hpp"
#include "duelopt/info_gain.hpp"
#include "duelopt/random.hpp"
#include "duelopt/sampling.hpp"

using namespace duelopt;
namespace fs = std::filesystem;

namespace {

// Tolerances and protocol constants.
constexpr double kGpRelTol = 1e-8;
constexpr double kGpSeconds = 10.0;
constexpr int kGpConfigs = 50;
constexpr int kInfoGainInstances = 100;
constexpr int kBordaPoints = 20;
constexpr int kBordaDraws = 100000;
constexpr double kBordaSigmas = 3.0;
constexpr double kBordaSeconds = 60.0;
constexpr int kSeeds = 20;
constexpr double kFilterFeasibleShare = 0.95;
constexpr double kFilterGamma = 0.2;
constexpr double kFilterDelta = 0.05;
constexpr double kCompOnlyRegretShare = 0.10;
constexpr double kCompOnlySeconds = 120.0;
constexpr double kAdaptiveFactor = 2.0;
constexpr std::uint64_t kMasterSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const DuelingOracle& currin() {
  static const DuelingOracle o = make_benchmark_oracle(Benchmark::CurrinExp);
  return o;
}

const OracleConstants& currin_constants() {
  static const OracleConstants c = measure_oracle_constants(currin());
  return c;
}

// ---------------------------------------------------------------- 1

double ref_kernel(const KernelSpec& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (s.family == KernelFamily::Linear) return s.scale * a.dot(b);
  const double r = (a - b).norm() / s.lengthscale;
  if (s.family == KernelFamily::SquaredExponential) return s.scale * std::exp(-0.5 * r * r);
  const double z = std::sqrt(5.0) * r;  // nu = 5/2
  return s.scale * (1.0 + z + z * z / 3.0) * std::exp(-z);
}

Outcome gp_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const KernelFamily families[] = {KernelFamily::SquaredExponential, KernelFamily::Matern,
                                   KernelFamily::Linear};
  const int dims[] = {1, 2, 8};
  double worst = 0.0;
  for (int c = 0; c < kGpConfigs; ++c) {
    const int d = dims[c % 3];
    const KernelSpec s{families[(c / 3) % 3], rng.uniform(0.1, 1.0), rng.uniform(0.5, 3.0), 2.5};
    const double noise = rng.uniform(0.05, 0.5);
    const int n = 1 + static_cast<int>(rng.next() % 30);
    Eigen::MatrixXd x(d, n);
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) {
      x.col(j) = rng.uniform_point(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
      y(j) = rng.uniform(-2.0, 2.0);
    }
    GpPosterior gp(s, noise, d);
    for (int j = 0; j < n; ++j) gp.append(x.col(j), y(j));

    // Dense oracle: explicit LU solves of (K + noise^2 I).
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = ref_kernel(s, x.col(i), x.col(j));
    a.diagonal().array() += noise * noise;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd alpha = lu.solve(y);
    for (int q = 0; q < 10; ++q) {
      const Eigen::VectorXd p = rng.uniform_point(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
      Eigen::VectorXd k(n);
      for (int i = 0; i < n; ++i) k(i) = ref_kernel(s, x.col(i), p);
      const double mean = k.dot(alpha);
      const double var = ref_kernel(s, p, p) - k.dot(lu.solve(k));
      const Prediction got = gp.query(p);
      const double prior = ref_kernel(s, p, p);
      worst = std::max(worst, std::abs(got.mean - mean) / std::max(std::abs(mean), 1.0));
      worst = std::max(worst, std::abs(got.variance - var) / std::max(std::abs(var), prior * 1e-3 + 1e-12));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kGpRelTol && secs < kGpSeconds,
          fmt("worst relative error %.3g", worst) + fmt(" over 50 configs, %.2f s", secs)};
}

// ---------------------------------------------------------------- 2

Outcome info_gain() {
  Rng rng(202);
  const KernelSpec s{KernelFamily::SquaredExponential, 0.3, 1.0, 2.5};
  const double noise = 0.5;
  double worst_ratio = 1e300;
  for (int inst = 0; inst < kInfoGainInstances; ++inst) {
    Eigen::MatrixXd c(2, 4);
    for (int j = 0; j < 4; ++j) c.col(j) = Eigen::Vector2d(rng.uniform(), rng.uniform());
    const double greedy = max_info_gain_greedy(s, c, 2, noise).values[1];
    double best = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        Eigen::Matrix2d k;
        k << ref_kernel(s, c.col(i), c.col(i)), ref_kernel(s, c.col(i), c.col(j)),
            ref_kernel(s, c.col(j), c.col(i)), ref_kernel(s, c.col(j), c.col(j));
        best = std::max(best, 0.5 * std::log((Eigen::Matrix2d::Identity() + k / (noise * noise)).determinant()));
      }
    }
    worst_ratio = std::min(worst_ratio, greedy / best);
  }
  const InfoGainCurve curve = max_info_gain_greedy(s, unit_grid(2, 12), 64, 0.1);
  bool monotone = true;
  bool sublinear = true;
  for (int n = 2; n <= 64; ++n) {
    monotone = monotone && curve.values[n - 1] >= curve.values[n - 2];
    sublinear = sublinear && curve.values[n - 1] / n <= curve.values[n - 2] / (n - 1) + 1e-12;
  }
  const bool pass = worst_ratio >= 1.0 - std::exp(-1.0) && monotone && sublinear;
  return {pass, fmt("min greedy/exhaustive %.4f", worst_ratio) +
                    (monotone ? ", non-decreasing" : ", NOT non-decreasing") +
                    (sublinear ? ", gamma_n/n non-increasing" : ", gamma_n/n increases")};
}

// ---------------------------------------------------------------- 3

Outcome borda_unbiased() {
  const auto t0 = std::chrono::steady_clock::now();
  const DuelingOracle& o = currin();
  const BordaTruth bt(o);
  Rng rng(303);
  int inside = 0;
  double worst = 0.0;
  for (int i = 0; i < kBordaPoints; ++i) {
    const Eigen::VectorXd x = rng.uniform_point(o.domain().lower(), o.domain().upper());
    long long wins = 0;
    for (int k = 0; k < kBordaDraws; ++k) {
      wins += compare(o, x, rng.uniform_point(o.domain().lower(), o.domain().upper()), rng);
    }
    const double truth = bt.value(x);
    const double se = std::sqrt(truth * (1.0 - truth) / kBordaDraws);
    const double z = std::abs(static_cast<double>(wins) / kBordaDraws - truth) / se;
    worst = std::max(worst, z);
    inside += z <= kBordaSigmas;
  }
  const double secs = seconds_since(t0);
  return {inside == kBordaPoints && secs < kBordaSeconds,
          std::to_string(inside) + "/20 points within 3 SE, worst " + fmt("%.2f SE", worst) +
              fmt(", %.1f s", secs)};
}

// ---------------------------------------------------------------- 4, 5

struct FilterStats {
  long long phase2_steps = 0;
  long long feasible = 0;
  int runs_reaching_phase2 = 0;
  int confident_runs = 0;
  long long labels_in_confident = 0;
  long long labels_localized = 0;
  double worst_margin = 1e300;  // min of f_r(x_t) - (f_r* - 4 gamma - L2 zeta)
  double floor_value = 0.0;
};

const FilterStats& filter_runs() {
  static const FilterStats stats = [] {
    FilterStats st;
    const DuelingOracle& o = currin();
    const OracleConstants& k = currin_constants();
    const BordaTruth bt(o);
    const Eigen::VectorXd xstar = o.target_optimum().x;
    const Eigen::VectorXd xr = o.comparison_optimum().x;
    const double fr_star = bt.optimum_value();
    const double floor_value = fr_star - 4.0 * kFilterGamma - k.l2_hat * k.zeta_hat;
    st.floor_value = floor_value;

    AlgConfig cfg;
    cfg.policy = Policy::CompGpUcb;
    cfg.gamma = kFilterGamma;
    cfg.l2 = k.l2_hat;
    cfg.zeta = k.zeta_hat;
    for (BetaSettings* b : {&cfg.beta_comp, &cfg.beta_label}) {
      b->mode = BetaMode::Theoretical;
      b->delta = kFilterDelta;
    }
    // Hyperparameters are fit once after the warm start so the information
    // gain curve behind the theoretical schedule is computed once per run.
    cfg.refit_every_comp = 0;
    cfg.refit_every_label = 0;

    for (int s = 0; s < kSeeds; ++s) {
      bool confident = true;
      bool reached = false;
      long long labels = 0;
      long long localized = 0;
      double margin = 1e300;
      const auto observer = [&](const StepInfo& i) {
        const AlgState& state = i.state;
        for (const Eigen::VectorXd* p : {&i.decision.x, &xstar, &xr}) {
          const Prediction pr = state.gp_comp.query(state.domain.to_unit(*p));
          if (std::abs(pr.mean - bt.value(*p)) > i.beta_comp * std::sqrt(pr.variance)) confident = false;
        }
        if (state.phase != Phase::Two) return;
        reached = true;
        ++st.phase2_steps;
        st.feasible += phi_value(state, state.domain.to_unit(xstar), i.beta_comp, i.c_zeta) >= 0.0;
        if (i.decision.kind == QueryKind::Label) {
          ++labels;
          const double m = bt.value(i.decision.x) - floor_value;
          margin = std::min(margin, m);
          localized += m >= 0.0;
        }
      };
      const RunKey key{0, 0, 0, s};
      run(cfg, o, CostModel{1.0, 0.1, 100.0}, run_seed(kMasterSeed, Benchmark::CurrinExp, key), observer);
      st.runs_reaching_phase2 += reached;
      if (confident && reached) {
        ++st.confident_runs;
        st.labels_in_confident += labels;
        st.labels_localized += localized;
        st.worst_margin = std::min(st.worst_margin, margin);
      }
    }
    return st;
  }();
  return stats;
}

Outcome optimizer_retention() {
  const FilterStats& st = filter_runs();
  const double share = st.phase2_steps ? static_cast<double>(st.feasible) / st.phase2_steps : 0.0;
  return {st.phase2_steps > 0 && share >= kFilterFeasibleShare,
          fmt("x* feasible in %.1f%%", 100.0 * share) + " of " + std::to_string(st.phase2_steps) +
              " phase-two steps (" + std::to_string(st.runs_reaching_phase2) + "/20 runs reached phase two)"};
}

Outcome label_localization() {
  const FilterStats& st = filter_runs();
  const bool pass = st.confident_runs > 0 && st.labels_localized == st.labels_in_confident;
  std::string detail = std::to_string(st.labels_localized) + "/" + std::to_string(st.labels_in_confident) +
                       " labels localized in " + std::to_string(st.confident_runs) +
                       " runs where the confidence checks held";
  detail += fmt(", floor f_r* - 4 gamma - L2 zeta = %.4f", st.floor_value);
  if (st.labels_in_confident > 0) detail += fmt(", worst margin %.4f", st.worst_margin);
  return {pass, detail};
}

// ---------------------------------------------------------------- 6

struct BudgetAudit {
  long long runs = 0;
  long long violations = 0;

  void check(const RunResult& r, const CostModel& m) {
    const QueryBounds nb = n_bounds(m);
    const long long q = r.labels + r.comparisons;
    ++runs;
    if (r.spent > m.budget * (1.0 + 1e-12) || q < nb.n_lower - 1 || q > nb.n_upper) ++violations;
  }
};

BudgetAudit& audit() {
  static BudgetAudit a;
  return a;
}

Outcome comparison_only_regime() {
  const auto t0 = std::chrono::steady_clock::now();
  const DuelingOracle o = make_benchmark_oracle(Benchmark::Synthetic1D);
  AlgConfig cfg;
  cfg.policy = Policy::ComparisonOnly;
  cfg.zeta = 0.0;
  cfg.gamma = 0.0;
  const CostModel m{5.0, 1.0, 500.0};  // 500 comparisons in total
  std::vector<double> after_warm, final_regret;
  bool monotone = true;
  for (int s = 0; s < kSeeds; ++s) {
    const RunKey key{0, 0, 0, s};
    const RunResult r = run(cfg, o, m, run_seed(kMasterSeed, Benchmark::Synthetic1D, key));
    audit().check(r, m);
    double warm = 0.0;
    for (const auto& e : r.trace.entries()) {
      if (e.phase == Phase::WarmStart) warm = e.simple_regret;
    }
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      monotone = monotone && r.trace.entries()[i].simple_regret <= r.trace.entries()[i - 1].simple_regret;
    }
    after_warm.push_back(warm);
    final_regret.push_back(r.trace.simple_regret());
  }
  const double mw = median(after_warm);
  const double mf = median(final_regret);
  const double secs = seconds_since(t0);
  return {mf < kCompOnlyRegretShare * mw && monotone && secs < kCompOnlySeconds,
          fmt("median regret %.3g", mf) + fmt(" vs %.3g after warm start", mw) +
              fmt(" (ratio %.3f)", mf / mw) + (monotone ? "" : ", trace NOT monotone") +
              fmt(", %.1f s", secs)};
}

// ---------------------------------------------------------------- 7, 8, 9, 12

ExperimentConfig ordering_config() {
  ExperimentConfig c = parse_config(R"({
    "benchmark": "CurrinExp",
    "policies": ["GPUcb", "CompGpUcb", "ComparisonOnly", "CompGpUcbAdaptive"],
    "budgets": [100],
    "costs": [{"label": 1, "comparison": 0.1}]
  })");
  c.seeds = kSeeds;
  c.master_seed = kMasterSeed;
  c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

std::map<std::string, double> means_by_policy(const ExperimentResult& r, double ratio) {
  std::map<std::string, double> out;
  for (const auto& row : r.rows) {
    if (std::abs(row.cost_ratio - ratio) < 1e-9) out[row.policy] = row.mean_regret;
  }
  return out;
}

void audit_experiment(const ExperimentConfig& c, const ExperimentResult& r) {
  for (std::size_t i = 0; i < r.keys.size(); ++i) {
    const RunKey& k = r.keys[i];
    audit().check(r.runs[i], CostModel{c.costs[k.cost].label, c.costs[k.cost].comparison, c.budgets[k.budget]});
  }
}

fs::path out_dir_path(const std::string& name) {
  return fs::temp_directory_path() / ("duelopt_acceptance_" + name);
}

fs::path out_dir(const std::string& name) {
  const fs::path p = out_dir_path(name);
  fs::remove_all(p);
  return p;
}

struct Ordering {
  ExperimentResult result;
  double seconds = 0.0;
};

const Ordering& ordering() {
  static const Ordering o = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig c = ordering_config();
    Ordering out{run_experiment(c, out_dir("a")), 0.0};
    out.seconds = seconds_since(t0);
    audit_experiment(c, out.result);
    return out;
  }();
  return o;
}

Outcome policy_ordering() {
  const Ordering& o = ordering();
  auto m = means_by_policy(o.result, 10.0);
  const double comp = m["CompGpUcb"], gp = m["GPUcb"], only = m["ComparisonOnly"];
  const bool pass = comp < gp && comp < only;
  return {pass, fmt("mean regret CompGpUcb %.4g", comp) + fmt(", GPUcb %.4g", gp) +
                    fmt(", ComparisonOnly %.4g", only) + fmt(" (four policies, %.0f s)", o.seconds)};
}

Outcome ratio_trend() {
  ExperimentConfig c = ordering_config();
  c.policies.resize(2);  // GPUcb, CompGpUcb
  c = with_cost_ratios(c, {1, 2, 5});
  const ExperimentResult r = run_experiment(c, std::nullopt);
  audit_experiment(c, r);
  const ExperimentResult& at10 = ordering().result;
  bool pass = true;
  std::string detail;
  for (double ratio : {1.0, 2.0, 5.0, 10.0}) {
    auto m = means_by_policy(ratio == 10.0 ? at10 : r, ratio);
    const bool ok = m["CompGpUcb"] <= m["GPUcb"];
    if (ratio > 1.0) pass = pass && ok;
    detail += fmt("ratio %g: ", ratio) + fmt("%.4g", m["CompGpUcb"]) + fmt(" vs %.4g", m["GPUcb"]) +
              (ratio == 1.0 ? " (descriptive)" : ok ? "" : " [violated]") + (ratio < 10.0 ? "; " : "");
  }
  return {pass, detail};
}

Outcome adaptivity() {
  auto m = means_by_policy(ordering().result, 10.0);
  const double ad = m["CompGpUcbAdaptive"], known = m["CompGpUcb"];
  return {ad <= kAdaptiveFactor * known,
          fmt("adaptive %.4g", ad) + fmt(" vs known-bias %.4g", known) + fmt(" (ratio %.2f)", ad / known)};
}

Outcome conservation() {
  const BudgetAudit& a = audit();
  return {a.runs > 0 && a.violations == 0,
          std::to_string(a.runs - a.violations) + "/" + std::to_string(a.runs) +
              " runs within budget and query-count bounds"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  ordering();
  ExperimentConfig c = ordering_config();
  c.workers = c.workers == 1 ? 3 : 1;  // a different thread count than the first pass
  run_experiment(c, out_dir("b"));
  const fs::path a = out_dir_path("a"), b = out_dir_path("b");
  const bool steps = slurp(a / "steps.csv") == slurp(b / "steps.csv");
  const bool agg = slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv");
  return {steps && agg && !slurp(a / "steps.csv").empty(),
          std::string("steps.csv ") + (steps ? "identical" : "DIFFERS") + ", aggregate.csv " +
              (agg ? "identical" : "DIFFERS")};
}

// ---------------------------------------------------------------- 11

Outcome global_optimizer() {
  const BoxDomain u1 = BoxDomain::unit(1), u2 = BoxDomain::unit(2);
  const OptResult k = direct_maximize([](const Eigen::VectorXd&) { return 3.5; }, u2, 100);
  const Eigen::Vector2d c(0.3, 0.7);
  const OptResult q = direct_maximize([&](const Eigen::VectorXd& x) { return -(x - c).squaredNorm(); }, u2, 500);
  const auto wiggle = [](const Eigen::VectorXd& x) { return std::sin(10.0 * x(0)) + x(0); };
  const OptResult w = direct_maximize(wiggle, u1, 300);
  double grid_best = -1e300;
  for (int i = 0; i <= 100000; ++i) grid_best = std::max(grid_best, wiggle(Eigen::VectorXd::Constant(1, i / 1e5)));
  const OptResult b = constrained_maximize([](const Eigen::VectorXd& x) { return x(0) + x(1); },
                                           [](const Eigen::VectorXd& x) { return 0.5 - x(0); }, u2, 800);
  const double dq = (q.argmax - c).lpNorm<Eigen::Infinity>();
  const double dw = std::abs(w.value - grid_best);
  const double db = (b.argmax - Eigen::Vector2d(0.5, 1.0)).lpNorm<Eigen::Infinity>();
  const bool pass = k.value == 3.5 && dq <= 1e-2 && dw <= 1e-3 && b.feasible && db <= 2e-2;
  return {pass, fmt("constant exact=%g", k.value == 3.5) + fmt(", quadratic argmax err %.2g", dq) +
                    fmt(", sin(10x)+x value err %.2g", dw) + fmt(", boundary err %.2g", db)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"GP posterior vs dense solve", gp_correctness},
      {"greedy information gain", info_gain},
      {"Borda unbiasedness", borda_unbiased},
      {"optimizer retention in the filter", optimizer_retention},
      {"label-query localization", label_localization},
      {"comparison-only regime", comparison_only_regime},
      {"CurrinExp policy ordering", policy_ordering},
      {"cost-ratio trend", ratio_trend},
      {"adaptive bias schedule", adaptivity},
      {"budget conservation", conservation},
      {"global optimizer", global_optimizer},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("criterion %2d %s  %-34s %s  [%.1f s]\n", id, out.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
