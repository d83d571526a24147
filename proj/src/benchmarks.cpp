#include "duelopt/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace duelopt {

namespace {

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_domain(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& lower,
                  const Eigen::VectorXd& upper, const char* what) {
  if (x.size() != lower.size()) {
    throw std::invalid_argument(std::string(what) + ": wrong input dimension");
  }
  if ((x.array() < lower.array()).any() || (x.array() > upper.array()).any()) {
    throw std::invalid_argument(std::string(what) + ": point outside the domain");
  }
}

// Unchecked; the low fidelity probes slightly outside [0,1] in x1 and above 1 in x2.
double currin_high(double x1, double x2) {
  const double factor = x2 > 0.0 ? 1.0 - std::exp(-1.0 / (2.0 * x2)) : 1.0;
  const double num = ((2300.0 * x1 + 1900.0) * x1 + 2092.0) * x1 + 60.0;
  const double den = ((100.0 * x1 + 500.0) * x1 + 4.0) * x1 + 20.0;
  return factor * num / den;
}

}  // namespace

std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::CurrinExp: return "CurrinExp";
    case Benchmark::Borehole: return "Borehole";
    case Benchmark::Synthetic1D: return "Synthetic1D";
  }
  return "?";
}

Benchmark benchmark_from_string(std::string_view name) {
  if (name == "CurrinExp") return Benchmark::CurrinExp;
  if (name == "Borehole") return Benchmark::Borehole;
  if (name == "Synthetic1D") return Benchmark::Synthetic1D;
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

BenchmarkConstants load_benchmark_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open benchmark constants file " + path);
  const nlohmann::json j = nlohmann::json::parse(in);

  BenchmarkConstants c;
  c.version = j.at("version").get<int>();
  const auto& bh = j.at("borehole");
  c.borehole.lower = vector_from(bh.at("lower"));
  c.borehole.upper = vector_from(bh.at("upper"));
  c.borehole.high_leading = bh.at("high").at("leading").get<double>();
  c.borehole.high_additive = bh.at("high").at("additive").get<double>();
  c.borehole.low_leading = bh.at("low").at("leading").get<double>();
  c.borehole.low_additive = bh.at("low").at("additive").get<double>();

  const auto& cu = j.at("currin");
  c.currin.lower = vector_from(cu.at("lower"));
  c.currin.upper = vector_from(cu.at("upper"));
  c.currin.low_shift = cu.at("low_shift").get<double>();

  const auto& sy = j.at("synthetic1d");
  c.synthetic1d.lower = vector_from(sy.at("lower"));
  c.synthetic1d.upper = vector_from(sy.at("upper"));
  c.synthetic1d.lengthscale = sy.at("lengthscale").get<double>();
  c.synthetic1d.centers = sy.at("centers").get<std::vector<double>>();
  c.synthetic1d.weights = sy.at("weights").get<std::vector<double>>();
  if (c.synthetic1d.centers.size() != c.synthetic1d.weights.size()) {
    throw std::runtime_error("synthetic1d: centers and weights differ in length");
  }
  return c;
}

std::string default_data_dir() { return DUELOPT_DATA_DIR; }

const BenchmarkConstants& benchmark_constants() {
  static const BenchmarkConstants constants =
      load_benchmark_constants(default_data_dir() + "/benchmarks.json");
  return constants;
}

BoxDomain benchmark_domain(Benchmark b) {
  const auto& c = benchmark_constants();
  switch (b) {
    case Benchmark::CurrinExp: return BoxDomain(c.currin.lower, c.currin.upper);
    case Benchmark::Borehole: return BoxDomain(c.borehole.lower, c.borehole.upper);
    case Benchmark::Synthetic1D: return BoxDomain(c.synthetic1d.lower, c.synthetic1d.upper);
  }
  throw std::logic_error("benchmark_domain: unknown benchmark");
}

double eval_currin(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity) {
  const auto& c = benchmark_constants().currin;
  check_domain(x, c.lower, c.upper, "eval_currin");
  const double x1 = x(0);
  const double x2 = x(1);
  if (fidelity == Fidelity::High) return currin_high(x1, x2);
  const double h = c.low_shift;
  const double down = std::max(0.0, x2 - h);
  return 0.25 * (currin_high(x1 + h, x2 + h) + currin_high(x1 + h, down) +
                 currin_high(x1 - h, x2 + h) + currin_high(x1 - h, down));
}

double eval_borehole(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity) {
  const auto& c = benchmark_constants().borehole;
  check_domain(x, c.lower, c.upper, "eval_borehole");
  const double rw = x(0);
  const double r = x(1);
  const double tu = x(2);
  const double hu = x(3);
  const double tl = x(4);
  const double hl = x(5);
  const double len = x(6);
  const double kw = x(7);
  const double leading = fidelity == Fidelity::High ? c.high_leading : c.low_leading;
  const double additive = fidelity == Fidelity::High ? c.high_additive : c.low_additive;
  const double log_ratio = std::log(r / rw);
  const double denom =
      log_ratio * (additive + 2.0 * len * tu / (log_ratio * rw * rw * kw) + tu / tl);
  return leading * tu * (hu - hl) / denom;
}

double eval_synthetic1d(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto& c = benchmark_constants().synthetic1d;
  check_domain(x, c.lower, c.upper, "eval_synthetic1d");
  double out = 0.0;
  const double inv = 1.0 / (2.0 * c.lengthscale * c.lengthscale);
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    const double d = x(0) - c.centers[i];
    out += c.weights[i] * std::exp(-d * d * inv);
  }
  return out;
}

}  // namespace duelopt
