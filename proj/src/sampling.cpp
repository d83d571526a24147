#include "duelopt/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/random/sobol.hpp>

namespace duelopt {

Eigen::MatrixXd sobol_points(int dim, int n) {
  if (dim < 1 || n < 0) throw std::invalid_argument("sobol_points: bad arguments");
  boost::random::sobol gen(static_cast<std::size_t>(dim));
  Eigen::MatrixXd pts(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) pts(i, j) = static_cast<double>(gen()) * 0x1.0p-64;
  }
  return pts;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = 1.0;
    double p2 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
    }
    dp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes(i) = mid - half * z;
    rule.nodes(n - 1 - i) = mid + half * z;
    rule.weights(i) = half * w;
    rule.weights(n - 1 - i) = half * w;
  }
  return rule;
}

Eigen::MatrixXd unit_grid(int dim, int per_axis) {
  if (dim < 1 || per_axis < 2) throw std::invalid_argument("unit_grid: bad arguments");
  Eigen::Index total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  Eigen::MatrixXd pts(dim, total);
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index rem = j;
    for (int i = 0; i < dim; ++i) {
      pts(i, j) = static_cast<double>(rem % per_axis) / (per_axis - 1);
      rem /= per_axis;
    }
  }
  return pts;
}

}  // namespace duelopt
