#include "duelopt/hyperfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "duelopt/direct.hpp"

namespace duelopt {

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const KernelSpec& spec, double noise) {
  if (x.cols() != y.size() || y.size() == 0) {
    throw std::invalid_argument("log_marginal_likelihood: need |X| = |Y| >= 1");
  }
  Eigen::MatrixXd k = kernel_gram(spec, x);
  k.diagonal().array() += noise * noise;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd w = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  return -0.5 * w.squaredNorm() - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

void HyperBounds::validate() const {
  if (!(lengthscale_lo > 0.0 && lengthscale_lo <= lengthscale_hi)) {
    throw std::invalid_argument("HyperBounds: need 0 < lengthscale_lo <= lengthscale_hi");
  }
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) {
    throw std::invalid_argument("HyperBounds: need 0 < scale_lo <= scale_hi");
  }
}

KernelSpec fit_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double noise,
                           const KernelSpec& family_template, const HyperBounds& bounds,
                           int budget) {
  bounds.validate();
  if (budget < 1) throw std::invalid_argument("fit_hyperparams: budget must be >= 1");

  // A degenerate axis still needs a non-empty box for the search.
  auto axis = [](double lo, double hi) {
    const double a = std::log(lo);
    const double b = std::log(hi);
    return b > a ? std::pair{a, b} : std::pair{a - 1e-9, a + 1e-9};
  };
  const auto [l_lo, l_hi] = axis(bounds.lengthscale_lo, bounds.lengthscale_hi);
  const auto [s_lo, s_hi] = axis(bounds.scale_lo, bounds.scale_hi);
  const BoxDomain box(Eigen::Vector2d(l_lo, s_lo), Eigen::Vector2d(l_hi, s_hi));

  auto make = [&](const Eigen::VectorXd& p) {
    KernelSpec spec = family_template;
    spec.lengthscale = std::clamp(std::exp(p(0)), bounds.lengthscale_lo, bounds.lengthscale_hi);
    spec.scale = std::clamp(std::exp(p(1)), bounds.scale_lo, bounds.scale_hi);
    return spec;
  };
  const PointFunction objective = [&](const Eigen::VectorXd& p) {
    const double v = log_marginal_likelihood(x, y, make(p), noise);
    return std::isfinite(v) ? v : -1e300;
  };
  const OptResult best = direct_maximize(objective, box, budget);
  return make(best.argmax);
}

}  // namespace duelopt
