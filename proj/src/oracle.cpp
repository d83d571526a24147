#include "duelopt/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace duelopt {

namespace {

void require_inside(const BoxDomain& domain, const Eigen::VectorXd& x, const char* what) {
  if (!domain.contains(x)) throw std::invalid_argument(std::string(what) + ": point outside domain");
}

}  // namespace

Optimum true_optimum(const PointFunction& f, const BoxDomain& domain, int evals) {
  const OptResult coarse = direct_maximize(f, domain, evals);
  const OptResult fine = coordinate_refine(f, domain, coarse, 0.02);
  return {fine.argmax, fine.value};
}

DuelingOracle::DuelingOracle(PointFunction target, PointFunction comparison, LinkFunction link,
                             double eta, BoxDomain domain, int optimum_evals)
    : target_(std::move(target)), comparison_(std::move(comparison)), link_(link), eta_(eta),
      domain_(std::move(domain)) {
  if (!(eta_ >= 0.0)) throw std::invalid_argument("DuelingOracle: eta must be >= 0");
  if (!(link_.temperature > 0.0)) {
    throw std::invalid_argument("DuelingOracle: link temperature must be positive");
  }
  target_opt_ = true_optimum(target_, domain_, optimum_evals);
  comparison_opt_ = true_optimum(comparison_, domain_, optimum_evals);
}

double DuelingOracle::win_probability(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  return link_eval(link_, comparison_(x) - comparison_(x2));
}

double label_query(const DuelingOracle& oracle, const Eigen::VectorXd& x, Rng& rng) {
  require_inside(oracle.domain(), x, "label_query");
  const double noise = oracle.eta() > 0.0 ? rng.uniform(-oracle.eta(), oracle.eta()) : 0.0;
  return oracle.target(x) + noise;
}

int compare(const DuelingOracle& oracle, const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
            Rng& rng) {
  require_inside(oracle.domain(), x, "compare");
  require_inside(oracle.domain(), x2, "compare");
  return rng.bernoulli(oracle.win_probability(x, x2)) ? 1 : 0;
}

double sampled_range(const PointFunction& f, const BoxDomain& domain, int samples) {
  Rng rng(0x5eedULL);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < samples; ++i) {
    const double v = f(rng.uniform_point(domain.lower(), domain.upper()));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

DuelingOracle make_benchmark_oracle(Benchmark benchmark, const OracleOptions& options) {
  PointFunction target;
  PointFunction comparison;
  switch (benchmark) {
    case Benchmark::CurrinExp:
      target = [](const Eigen::VectorXd& x) { return eval_currin(x, Fidelity::High); };
      comparison = [fid = options.comparison_fidelity](const Eigen::VectorXd& x) {
        return eval_currin(x, fid);
      };
      break;
    case Benchmark::Borehole:
      target = [](const Eigen::VectorXd& x) { return eval_borehole(x, Fidelity::High); };
      comparison = [fid = options.comparison_fidelity](const Eigen::VectorXd& x) {
        return eval_borehole(x, fid);
      };
      break;
    case Benchmark::Synthetic1D:
      target = [](const Eigen::VectorXd& x) { return eval_synthetic1d(x); };
      comparison = target;
      break;
  }
  const BoxDomain domain = benchmark_domain(benchmark);

  LinkFunction link{options.link, 1.0};
  if (options.temperature) {
    link.temperature = *options.temperature;
  } else {
    const double range_c = sampled_range(comparison, domain);
    link.temperature = options.link == LinkFamily::Linear ? range_c : range_c / 4.0;
  }
  const double eta = options.eta ? *options.eta : 0.05 * sampled_range(target, domain);
  return DuelingOracle(std::move(target), std::move(comparison), link, eta, domain,
                       options.optimum_evals);
}

}  // namespace duelopt
