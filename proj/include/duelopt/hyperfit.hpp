#pragma once

#include <Eigen/Core>

#include "duelopt/kernel.hpp"

namespace duelopt {

/// log p(Y | X) = -1/2 Y^T (K + noise^2 I)^{-1} Y - 1/2 log det(K + noise^2 I) - n/2 log(2 pi).
/// X holds one point per column.
double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const KernelSpec& spec, double noise);

/// Search box for (lengthscale, scale). Both are searched on a log axis.
struct HyperBounds {
  double lengthscale_lo = 0.05;
  double lengthscale_hi = 2.0;
  double scale_lo = 1e-2;
  double scale_hi = 1e2;

  void validate() const;
  bool operator==(const HyperBounds&) const = default;
};

/// Maximizes the log marginal likelihood over (log lengthscale, log scale)
/// inside `bounds` with the rectangle search, using at most `budget`
/// likelihood evaluations. Family and nu are taken from `family_template`.
/// Deterministic; degenerate data still yields an in-bounds spec.
KernelSpec fit_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double noise,
                           const KernelSpec& family_template, const HyperBounds& bounds,
                           int budget = 200);

}  // namespace duelopt
