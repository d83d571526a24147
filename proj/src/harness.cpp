#include "duelopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace duelopt {

namespace {

using json = nlohmann::ordered_json;

// Reads one JSON object, remembering its key path for error messages and
// rejecting keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "top level" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(key_path(key), "missing required key");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key_path(key), "expected a number");
    return v->get<double>();
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key_path(key), "must be positive");
    return v;
  }

  int integer(const std::string& key, int fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(key_path(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key_path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key_path(key), "expected a string");
    return v->get<std::string>();
  }

  // Number, or "auto" for an empty optional.
  std::optional<double> number_or_auto(const std::string& key, std::optional<double> fallback,
                                       bool allow_zero = false) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_string() && v->get<std::string>() == "auto") return std::nullopt;
    if (!v->is_number()) fail(key_path(key), "expected a number or \"auto\"");
    const double d = v->get<double>();
    if (!(d > 0.0 || (allow_zero && d == 0.0))) fail(key_path(key), "out of range");
    return d;
  }

  template <class F>
  auto parse_enum(const std::string& key, F parse, decltype(parse(std::string_view{})) fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key_path(key), "expected a string");
    try {
      return parse(v->get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(key_path(key), e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(key_path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

BiasValue parse_bias(ObjectReader& r, const std::string& key, BiasValue fallback) {
  const json* v = r.find(key);
  if (!v) return fallback;
  if (v->is_number()) {
    const double d = v->get<double>();
    if (!(d >= 0.0)) ObjectReader::fail(r.key_path(key), "must be >= 0");
    return {d, false};
  }
  if (v->is_string()) {
    const std::string s = v->get<std::string>();
    if (s == "zeta_hat") return {1.0, true};
    const std::string suffix = "*zeta_hat";
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      double f = 0.0;
      const char* begin = s.data();
      const char* end = s.data() + s.size() - suffix.size();
      auto [ptr, ec] = std::from_chars(begin, end, f);
      if (ec == std::errc() && ptr == end && f >= 0.0) return {f, true};
    }
  }
  ObjectReader::fail(r.key_path(key), "expected a number, \"zeta_hat\" or \"<factor>*zeta_hat\"");
}

json bias_to_json(const BiasValue& b) {
  if (!b.relative) return b.value;
  return format_double(b.value) + "*zeta_hat";
}

KernelFamily parse_family(std::string_view s) { return kernel_family_from_string(s); }

KernelSpec parse_kernel(const json& j, const std::string& path, KernelSpec k) {
  ObjectReader r(j, path);
  k.family = r.parse_enum("family", parse_family, k.family);
  k.lengthscale = r.positive("lengthscale", k.lengthscale);
  k.scale = r.positive("scale", k.scale);
  k.nu = r.positive("nu", k.nu);
  r.finish();
  return k;
}

json kernel_to_json(const KernelSpec& k) {
  json j;
  j["family"] = std::string(to_string(k.family));
  j["lengthscale"] = k.lengthscale;
  j["scale"] = k.scale;
  j["nu"] = k.nu;
  return j;
}

HyperBounds parse_bounds(const json& j, const std::string& path, HyperBounds b) {
  ObjectReader r(j, path);
  b.lengthscale_lo = r.positive("lengthscale_lo", b.lengthscale_lo);
  b.lengthscale_hi = r.positive("lengthscale_hi", b.lengthscale_hi);
  b.scale_lo = r.positive("scale_lo", b.scale_lo);
  b.scale_hi = r.positive("scale_hi", b.scale_hi);
  r.finish();
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    ObjectReader::fail(path, e.what());
  }
  return b;
}

json bounds_to_json(const HyperBounds& b) {
  json j;
  j["lengthscale_lo"] = b.lengthscale_lo;
  j["lengthscale_hi"] = b.lengthscale_hi;
  j["scale_lo"] = b.scale_lo;
  j["scale_hi"] = b.scale_hi;
  return j;
}

BetaMode parse_beta_mode(std::string_view s) {
  if (s == "Heuristic") return BetaMode::Heuristic;
  if (s == "Theoretical") return BetaMode::Theoretical;
  throw std::invalid_argument("unknown beta mode '" + std::string(s) + "'");
}

// epsilon_heur is set once at the top level, so it is not read here.
BetaSettings parse_beta(const json& j, const std::string& path, BetaSettings b) {
  ObjectReader r(j, path);
  b.mode = r.parse_enum("mode", parse_beta_mode, b.mode);
  b.rkhs_bound = r.positive("rkhs_bound", b.rkhs_bound);
  b.delta = r.number("delta", b.delta);
  if (!(b.delta > 0.0 && b.delta < 1.0)) ObjectReader::fail(r.key_path("delta"), "must lie in (0,1)");
  b.grid_size = r.integer("grid_size", b.grid_size);
  if (b.grid_size < 1) ObjectReader::fail(r.key_path("grid_size"), "must be >= 1");
  r.finish();
  return b;
}

json beta_to_json(const BetaSettings& b) {
  json j;
  j["mode"] = b.mode == BetaMode::Heuristic ? "Heuristic" : "Theoretical";
  j["rkhs_bound"] = b.rkhs_bound;
  j["delta"] = b.delta;
  j["grid_size"] = b.grid_size;
  return j;
}

Fidelity parse_fidelity(std::string_view s) {
  if (s == "High") return Fidelity::High;
  if (s == "Low") return Fidelity::Low;
  throw std::invalid_argument("unknown fidelity '" + std::string(s) + "'");
}

PolicyEntry parse_policy(const json& j, const std::string& path) {
  PolicyEntry e;
  ObjectReader r(j, path);
  const json& p = r.require("policy");
  if (!p.is_string()) ObjectReader::fail(r.key_path("policy"), "expected a string");
  try {
    e.alg.policy = policy_from_string(p.get<std::string>());
  } catch (const std::invalid_argument& ex) {
    ObjectReader::fail(r.key_path("policy"), ex.what());
  }
  AlgConfig& a = e.alg;
  e.name = r.string("name", std::string(to_string(a.policy)));
  e.zeta = parse_bias(r, "zeta", e.zeta);
  e.zeta0 = parse_bias(r, "zeta0", e.zeta0);
  e.zeta_max = parse_bias(r, "zeta_max", e.zeta_max);
  a.gamma = r.number("gamma", a.gamma);
  if (!(a.gamma >= 0.0)) ObjectReader::fail(r.key_path("gamma"), "must be >= 0");
  a.l2 = r.number_or_auto("l2", std::nullopt);
  if (const json* v = r.find("beta_label")) a.beta_label = parse_beta(*v, r.key_path("beta_label"), a.beta_label);
  if (const json* v = r.find("beta_comp")) a.beta_comp = parse_beta(*v, r.key_path("beta_comp"), a.beta_comp);
  if (const json* v = r.find("kernel_label")) a.kernel_label = parse_kernel(*v, r.key_path("kernel_label"), a.kernel_label);
  if (const json* v = r.find("kernel_comp")) a.kernel_comp = parse_kernel(*v, r.key_path("kernel_comp"), a.kernel_comp);
  if (const json* v = r.find("bounds_label")) a.bounds_label = parse_bounds(*v, r.key_path("bounds_label"), a.bounds_label);
  if (const json* v = r.find("bounds_comp")) a.bounds_comp = parse_bounds(*v, r.key_path("bounds_comp"), a.bounds_comp);
  a.comp_noise = r.positive("comp_noise", a.comp_noise);
  a.label_noise = r.number_or_auto("label_noise", std::nullopt);
  a.warm_comp_fraction = r.number("warm_comp_fraction", a.warm_comp_fraction);
  if (!(a.warm_comp_fraction >= 0.0 && a.warm_comp_fraction <= 1.0)) {
    ObjectReader::fail(r.key_path("warm_comp_fraction"), "must lie in [0,1]");
  }
  a.refit_every_comp = r.integer("refit_every_comp", a.refit_every_comp);
  a.refit_every_label = r.integer("refit_every_label", a.refit_every_label);
  if (a.refit_every_comp < 0) ObjectReader::fail(r.key_path("refit_every_comp"), "must be >= 0");
  if (a.refit_every_label < 0) ObjectReader::fail(r.key_path("refit_every_label"), "must be >= 0");
  a.refit_max_points = r.integer("refit_max_points", a.refit_max_points);
  if (a.refit_max_points < 2) ObjectReader::fail(r.key_path("refit_max_points"), "must be >= 2");
  a.hyper_evals = r.integer("hyper_evals", a.hyper_evals);
  if (a.hyper_evals < 1) ObjectReader::fail(r.key_path("hyper_evals"), "must be >= 1");
  a.refresh_fr_lcb = r.boolean("refresh_fr_lcb", a.refresh_fr_lcb);
  r.finish();
  if (e.zeta0.relative == e.zeta_max.relative && e.zeta0.value > e.zeta_max.value) {
    ObjectReader::fail(r.key_path("zeta0"), "must not exceed zeta_max");
  }
  return e;
}

json policy_to_json(const PolicyEntry& e) {
  const AlgConfig& a = e.alg;
  json j;
  j["policy"] = std::string(to_string(a.policy));
  j["name"] = e.name;
  j["zeta"] = bias_to_json(e.zeta);
  j["zeta0"] = bias_to_json(e.zeta0);
  j["zeta_max"] = bias_to_json(e.zeta_max);
  j["gamma"] = a.gamma;
  j["l2"] = a.l2 ? json(*a.l2) : json("auto");
  j["beta_label"] = beta_to_json(a.beta_label);
  j["beta_comp"] = beta_to_json(a.beta_comp);
  j["kernel_label"] = kernel_to_json(a.kernel_label);
  j["kernel_comp"] = kernel_to_json(a.kernel_comp);
  j["bounds_label"] = bounds_to_json(a.bounds_label);
  j["bounds_comp"] = bounds_to_json(a.bounds_comp);
  j["comp_noise"] = a.comp_noise;
  j["label_noise"] = a.label_noise ? json(*a.label_noise) : json("auto");
  j["warm_comp_fraction"] = a.warm_comp_fraction;
  j["refit_every_comp"] = a.refit_every_comp;
  j["refit_every_label"] = a.refit_every_label;
  j["refit_max_points"] = a.refit_max_points;
  j["hyper_evals"] = a.hyper_evals;
  j["refresh_fr_lcb"] = a.refresh_fr_lcb;
  return j;
}

std::vector<double> positive_list(ObjectReader& r, const std::string& key,
                                  std::vector<double> fallback) {
  const json* v = r.find(key);
  if (!v) return fallback;
  if (!v->is_array() || v->empty()) ObjectReader::fail(r.key_path(key), "expected a nonempty list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& x = (*v)[i];
    const std::string where = r.key_path(key) + "[" + std::to_string(i) + "]";
    if (!x.is_number()) ObjectReader::fail(where, "expected a number");
    if (!(x.get<double>() > 0.0)) ObjectReader::fail(where, "must be positive");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Benchmark parse_benchmark_name(const std::string& name) {
  const std::string s = lower(name);
  if (s == "currin" || s == "currinexp") return Benchmark::CurrinExp;
  if (s == "borehole") return Benchmark::Borehole;
  if (s == "synthetic1d" || s == "synthetic") return Benchmark::Synthetic1D;
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (policies.empty()) throw ConfigError("policies: must be nonempty");
  if (budgets.empty()) throw ConfigError("budgets: must be nonempty");
  if (costs.empty()) throw ConfigError("costs: must be nonempty");
  if (seeds < 1) throw ConfigError("seeds: must be >= 1");
  if (workers < 1) throw ConfigError("workers: must be >= 1");
  if (!(warm_start >= 0.0)) throw ConfigError("warm_start: must be >= 0");
  if (!(epsilon_heur > 0.0)) throw ConfigError("epsilon_heur: must be positive");
  if (acq_evals_per_dim < 1) throw ConfigError("acq_evals_per_dim: must be >= 1");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > warm_start)) {
      throw ConfigError("budgets[" + std::to_string(i) + "]: must exceed warm_start");
    }
  }
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const std::string where = "costs[" + std::to_string(i) + "]";
    try {
      CostModel{costs[i].label, costs[i].comparison, 1.0}.validate(allow_equal_costs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  c.benchmark = r.parse_enum("benchmark", benchmark_from_string, c.benchmark);
  r.require("benchmark");

  const json& pol = r.require("policies");
  if (!pol.is_array() || pol.empty()) ObjectReader::fail("policies", "expected a nonempty list");
  for (std::size_t i = 0; i < pol.size(); ++i) {
    const std::string where = "policies[" + std::to_string(i) + "]";
    if (pol[i].is_string()) {
      json obj;
      obj["policy"] = pol[i];
      c.policies.push_back(parse_policy(obj, where));
    } else {
      c.policies.push_back(parse_policy(pol[i], where));
    }
  }

  c.budgets = positive_list(r, "budgets", c.budgets);
  c.allow_equal_costs = r.boolean("allow_equal_costs", c.allow_equal_costs);
  const json* costs = r.find("costs");
  const json* ratios = r.find("cost_ratios");
  if (costs && ratios) ObjectReader::fail("cost_ratios", "give either costs or cost_ratios");
  if (costs) {
    if (!costs->is_array() || costs->empty()) ObjectReader::fail("costs", "expected a nonempty list");
    c.costs.clear();
    for (std::size_t i = 0; i < costs->size(); ++i) {
      ObjectReader cr((*costs)[i], "costs[" + std::to_string(i) + "]");
      CostPair p;
      p.label = cr.positive("label", p.label);
      p.comparison = cr.positive("comparison", p.comparison);
      cr.finish();
      c.costs.push_back(p);
    }
  }
  if (ratios) {
    c = with_cost_ratios(c, positive_list(r, "cost_ratios", {}));
  }

  c.seeds = r.integer("seeds", c.seeds);
  if (const json* v = r.find("master_seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      ObjectReader::fail("master_seed", "expected a nonnegative integer");
    }
    c.master_seed = v->get<std::uint64_t>();
  }
  c.warm_start = r.number("warm_start", c.warm_start);
  c.epsilon_heur = r.positive("epsilon_heur", c.epsilon_heur);
  c.acq_evals_per_dim = r.integer("acq_evals_per_dim", c.acq_evals_per_dim);
  c.output = r.string("output", c.output);
  c.workers = r.integer("workers", c.workers);

  if (const json* v = r.find("oracle")) {
    ObjectReader o(*v, "oracle");
    c.oracle.link = o.parse_enum("link", link_family_from_string, c.oracle.link);
    c.oracle.temperature = o.number_or_auto("temperature", std::nullopt);
    c.oracle.eta = o.number_or_auto("eta", std::nullopt, true);
    c.oracle.comparison_fidelity =
        o.parse_enum("comparison_fidelity", parse_fidelity, c.oracle.comparison_fidelity);
    c.oracle.optimum_evals = o.integer("optimum_evals", c.oracle.optimum_evals);
    if (c.oracle.optimum_evals < 1) ObjectReader::fail("oracle.optimum_evals", "must be >= 1");
    o.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["benchmark"] = std::string(to_string(c.benchmark));
  j["policies"] = json::array();
  for (const auto& p : c.policies) j["policies"].push_back(policy_to_json(p));
  j["budgets"] = c.budgets;
  j["costs"] = json::array();
  for (const auto& p : c.costs) j["costs"].push_back({{"label", p.label}, {"comparison", p.comparison}});
  j["allow_equal_costs"] = c.allow_equal_costs;
  j["seeds"] = c.seeds;
  j["master_seed"] = c.master_seed;
  j["warm_start"] = c.warm_start;
  j["epsilon_heur"] = c.epsilon_heur;
  j["acq_evals_per_dim"] = c.acq_evals_per_dim;
  json o;
  o["link"] = std::string(to_string(c.oracle.link));
  o["temperature"] = c.oracle.temperature ? json(*c.oracle.temperature) : json("auto");
  o["eta"] = c.oracle.eta ? json(*c.oracle.eta) : json("auto");
  o["comparison_fidelity"] = c.oracle.comparison_fidelity == Fidelity::High ? "High" : "Low";
  o["optimum_evals"] = c.oracle.optimum_evals;
  j["oracle"] = o;
  j["output"] = c.output;
  j["workers"] = c.workers;
  return j.dump(2) + "\n";
}

ExperimentConfig with_cost_ratios(ExperimentConfig config, const std::vector<double>& ratios) {
  if (ratios.empty()) throw ConfigError("cost_ratios: must be nonempty");
  config.costs.clear();
  for (double ratio : ratios) {
    if (!(ratio >= 1.0)) throw ConfigError("cost_ratios: ratios must be >= 1");
    if (ratio == 1.0) config.allow_equal_costs = true;
    config.costs.push_back(CostPair{1.0, 1.0 / ratio});
  }
  return config;
}

std::uint64_t run_seed(std::uint64_t master_seed, Benchmark benchmark, const RunKey& key) {
  std::uint64_t h = splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(benchmark)));
  for (std::uint64_t v : {static_cast<std::uint64_t>(key.policy), static_cast<std::uint64_t>(key.budget),
                          static_cast<std::uint64_t>(key.cost), static_cast<std::uint64_t>(key.seed)}) {
    h = splitmix64(h ^ splitmix64(v));
  }
  return h;
}

std::vector<RunKey> enumerate_runs(const ExperimentConfig& config) {
  std::vector<RunKey> keys;
  for (std::size_t p = 0; p < config.policies.size(); ++p)
    for (std::size_t b = 0; b < config.budgets.size(); ++b)
      for (std::size_t c = 0; c < config.costs.size(); ++c)
        for (int s = 0; s < config.seeds; ++s) keys.push_back({p, b, c, s});
  return keys;
}

AggregateRow aggregate(std::vector<double> values) {
  AggregateRow row;
  const std::size_t n = values.size();
  row.seeds = static_cast<int>(n);
  if (n == 0) return row;
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean_regret = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean_regret) * (v - row.mean_regret);
    row.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return row;
}

AlgConfig resolve_policy(const PolicyEntry& entry, const ExperimentConfig& config,
                         const OracleConstants& constants) {
  AlgConfig a = entry.alg;
  a.zeta = entry.zeta.resolve(constants.zeta_hat);
  // Bias levels only matter to the adaptive policy; with an unbiased oracle
  // (zeta_hat = 0) relative levels collapse and must be given absolutely.
  if (a.policy == Policy::CompGpUcbAdaptive) {
    a.zeta0 = entry.zeta0.resolve(constants.zeta_hat);
    a.zeta_max = entry.zeta_max.resolve(constants.zeta_hat);
  }
  if (!a.l2) a.l2 = constants.l2_hat;
  a.beta_label.epsilon_heur = config.epsilon_heur;
  a.beta_comp.epsilon_heur = config.epsilon_heur;
  a.warm_start = config.warm_start;
  a.acq_evals_per_dim = config.acq_evals_per_dim;
  return a;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  std::ofstream steps_out;
  std::ofstream agg_out;
  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir->string());
    steps_out.open(*out_dir / "steps.csv", std::ios::binary | std::ios::trunc);
    agg_out.open(*out_dir / "aggregate.csv", std::ios::binary | std::ios::trunc);
    if (!steps_out || !agg_out) {
      throw std::runtime_error("cannot write output files in " + out_dir->string());
    }
  }

  const DuelingOracle oracle = make_benchmark_oracle(config.benchmark, config.oracle);
  ExperimentResult result;
  result.constants = measure_oracle_constants(oracle);

  std::vector<AlgConfig> algs;
  for (const auto& p : config.policies) {
    algs.push_back(resolve_policy(p, config, result.constants));
    try {
      algs.back().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("policy " + p.name + ": " + e.what());
    }
  }

  result.keys = enumerate_runs(config);
  result.runs.resize(result.keys.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < result.keys.size(); i = next++) {
      const RunKey& k = result.keys[i];
      try {
        const CostModel cost{config.costs[k.cost].label, config.costs[k.cost].comparison,
                             config.budgets[k.budget]};
        result.runs[i] = run(algs[k.policy], oracle, cost, run_seed(config.master_seed, config.benchmark, k));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = result.keys.size();
      }
    }
  };
  const int workers = std::min<int>(config.workers, static_cast<int>(result.keys.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // One row per (policy, budget, cost); seeds are contiguous in run order.
  for (std::size_t i = 0; i < result.keys.size(); i += static_cast<std::size_t>(config.seeds)) {
    const RunKey& k = result.keys[i];
    std::vector<double> finals;
    for (int s = 0; s < config.seeds; ++s) finals.push_back(result.runs[i + s].trace.simple_regret());
    AggregateRow row = aggregate(std::move(finals));
    row.benchmark = std::string(to_string(config.benchmark));
    row.policy = config.policies[k.policy].name;
    row.budget = config.budgets[k.budget];
    row.label_cost = config.costs[k.cost].label;
    row.comp_cost = config.costs[k.cost].comparison;
    row.cost_ratio = row.label_cost / row.comp_cost;
    result.rows.push_back(row);
  }

  if (out_dir) {
    write_steps_csv(steps_out, config, result);
    write_aggregate_csv(agg_out, result.rows);
    if (!steps_out || !agg_out) throw std::runtime_error("writing CSV output failed");
  }
  return result;
}

void write_steps_csv(std::ostream& out, const ExperimentConfig& config,
                     const ExperimentResult& result) {
  const int d = benchmark_domain(config.benchmark).dim();
  out << "#schema=duelopt-steps-v1\n";
  out << "benchmark,policy,budget,label_cost,comp_cost,seed,t,kind,phase,cost,cumulative_cost";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  for (int i = 0; i < d; ++i) out << ",opp" << i;
  out << ",outcome,regret,simple_regret\n";
  const std::string bench(to_string(config.benchmark));
  for (std::size_t r = 0; r < result.keys.size(); ++r) {
    const RunKey& k = result.keys[r];
    const std::string prefix = bench + "," + config.policies[k.policy].name + "," +
                               format_double(config.budgets[k.budget]) + "," +
                               format_double(config.costs[k.cost].label) + "," +
                               format_double(config.costs[k.cost].comparison) + "," +
                               std::to_string(k.seed) + ",";
    for (const TraceEntry& e : result.runs[r].trace.entries()) {
      out << prefix << e.t << ',' << to_string(e.kind) << ',' << to_string(e.phase) << ','
          << format_double(e.cost) << ',' << format_double(e.cumulative_cost);
      for (int i = 0; i < d; ++i) out << ',' << format_double(e.x(i));
      for (int i = 0; i < d; ++i) {
        out << ',';
        if (e.x2) out << format_double((*e.x2)(i));
      }
      out << ',' << format_double(e.outcome) << ',' << format_double(e.regret) << ','
          << format_double(e.simple_regret) << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "#schema=duelopt-aggregate-v1\n";
  out << "benchmark,policy,budget,cost_ratio,label_cost,comp_cost,mean_simple_regret,std_error,seeds\n";
  for (const auto& r : rows) {
    out << r.benchmark << ',' << r.policy << ',' << format_double(r.budget) << ','
        << format_double(r.cost_ratio) << ',' << format_double(r.label_cost) << ','
        << format_double(r.comp_cost) << ',' << format_double(r.mean_regret) << ','
        << format_double(r.std_error) << ',' << r.seeds << '\n';
  }
}

}  // namespace duelopt
