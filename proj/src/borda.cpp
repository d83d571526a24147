#include "duelopt/borda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "duelopt/sampling.hpp"

namespace duelopt {

BordaTruth::BordaTruth(const DuelingOracle& oracle, BordaSettings settings) : oracle_(&oracle) {
  const BoxDomain& domain = oracle.domain();
  const int d = domain.dim();
  Eigen::MatrixXd nodes;
  if (d <= 2) {
    std::vector<QuadratureRule> rules;
    for (int i = 0; i < d; ++i) {
      rules.push_back(gauss_legendre(settings.nodes_per_axis, domain.lower()(i), domain.upper()(i)));
    }
    const int per = settings.nodes_per_axis;
    const Eigen::Index total = d == 1 ? per : static_cast<Eigen::Index>(per) * per;
    nodes.resize(d, total);
    weights_.resize(total);
    const double volume = domain.width().prod();
    for (Eigen::Index j = 0; j < total; ++j) {
      const Eigen::Index a = j % per;
      const Eigen::Index b = j / per;
      nodes(0, j) = rules[0].nodes(a);
      double w = rules[0].weights(a);
      if (d == 2) {
        nodes(1, j) = rules[1].nodes(b);
        w *= rules[1].weights(b);
      }
      weights_(j) = w / volume;
    }
  } else {
    nodes = domain.from_unit_cols(sobol_points(d, settings.sample_points));
    weights_ = Eigen::ArrayXd::Constant(settings.sample_points, 1.0 / settings.sample_points);
  }
  node_values_.resize(nodes.cols());
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
    node_values_(j) = oracle.comparison(nodes.col(j));
  }
  optimum_ = value(oracle.comparison_optimum().x);
}

double BordaTruth::value(const Eigen::VectorXd& x) const {
  const double fc = oracle_->comparison(x);
  const Eigen::ArrayXd gaps = fc - node_values_;
  return (weights_ * link_eval(oracle_->link(), gaps)).sum();
}

double borda_truth(const BordaTruth& bt, const Eigen::VectorXd& x) { return bt.value(x); }

LipschitzEstimate verify_assumption2(const BordaTruth& bt, const Eigen::MatrixXd& grid) {
  const DuelingOracle& oracle = bt.oracle();
  const double fc_star = oracle.comparison_optimum().value;
  const double fr_star = bt.optimum_value();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    const Eigen::VectorXd x = grid.col(j);
    const double gap_c = fc_star - oracle.comparison(x);
    if (gap_c < 1e-9) continue;
    const double ratio = (fr_star - bt.value(x)) / gap_c;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  if (!std::isfinite(lo)) throw std::invalid_argument("verify_assumption2: no admissible grid point");
  return {1.0 / lo, hi};
}

double verify_assumption1(const DuelingOracle& oracle, const Eigen::MatrixXd& grid) {
  const double f_star = oracle.target_optimum().value;
  const double fc_star = oracle.comparison_optimum().value;
  double zeta = 0.0;
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    const Eigen::VectorXd x = grid.col(j);
    const double gap = (fc_star - oracle.comparison(x)) - (f_star - oracle.target(x));
    zeta = std::max(zeta, std::abs(gap));
  }
  return zeta;
}

Eigen::MatrixXd domain_grid(const BoxDomain& domain, int per_axis) {
  const int d = domain.dim();
  if (d <= 2) return domain.from_unit_cols(unit_grid(d, per_axis));
  return domain.from_unit_cols(sobol_points(d, per_axis * per_axis));
}

OracleConstants measure_oracle_constants(const DuelingOracle& oracle, int per_axis,
                                         BordaSettings settings) {
  const Eigen::MatrixXd grid = domain_grid(oracle.domain(), per_axis);
  const BordaTruth bt(oracle, settings);
  const LipschitzEstimate l = verify_assumption2(bt, grid);
  return {verify_assumption1(oracle, grid), l.l1_hat, l.l2_hat};
}

}  // namespace duelopt
