#pragma once

#include <Eigen/Core>

namespace duelopt {

/// First `n` points of the Sobol sequence in [0,1)^dim, one per column.
Eigen::MatrixXd sobol_points(int dim, int n);

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Regular grid with `per_axis` points per coordinate over the unit cube,
/// including the faces. Columns are points.
Eigen::MatrixXd unit_grid(int dim, int per_axis);

}  // namespace duelopt
