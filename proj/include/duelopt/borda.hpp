#pragma once

#include <Eigen/Core>

#include "duelopt/oracle.hpp"

namespace duelopt {

struct BordaSettings {
  int nodes_per_axis = 200;     // tensor Gauss-Legendre, used for d <= 2
  int sample_points = 200000;   // Sobol average, used for d > 2
};

/// Ground-truth Borda function f_r(x) = E_X[link(f_c(x) - f_c(X))] with X
/// uniform on the domain, by quadrature. f_c is tabulated on the nodes once.
/// Holds a reference to the oracle, which must outlive it.
class BordaTruth {
 public:
  explicit BordaTruth(const DuelingOracle& oracle, BordaSettings settings = {});

  double value(const Eigen::VectorXd& x) const;

  /// f_r^*; the link is monotone, so f_r peaks where f_c does.
  double optimum_value() const { return optimum_; }
  const Eigen::VectorXd& optimum_point() const { return oracle_->comparison_optimum().x; }

  const DuelingOracle& oracle() const { return *oracle_; }

 private:
  const DuelingOracle* oracle_;
  Eigen::ArrayXd weights_;
  Eigen::ArrayXd node_values_;
  double optimum_ = 0.0;
};

double borda_truth(const BordaTruth& bt, const Eigen::VectorXd& x);

struct LipschitzEstimate {
  double l1_hat = 0.0;
  double l2_hat = 0.0;
};

/// Over grid points (columns) with f_c^* - f_c(x) >= 1e-9, forms the ratios
/// (f_r^* - f_r(x)) / (f_c^* - f_c(x)); returns L1 = 1 / min ratio and
/// L2 = max ratio. Throws std::invalid_argument when no grid point qualifies.
LipschitzEstimate verify_assumption2(const BordaTruth& bt, const Eigen::MatrixXd& grid);

/// max over grid columns of |(f_c^* - f_c(x)) - (f^* - f(x))|.
double verify_assumption1(const DuelingOracle& oracle, const Eigen::MatrixXd& grid);

/// Grid in domain units: a regular lattice for d <= 2 with `per_axis` points
/// per side, otherwise `per_axis`^2 Sobol points.
Eigen::MatrixXd domain_grid(const BoxDomain& domain, int per_axis);

struct OracleConstants {
  double zeta_hat = 0.0;
  double l1_hat = 0.0;
  double l2_hat = 0.0;
};

/// zeta_hat, L1_hat and L2_hat over domain_grid(domain, per_axis).
OracleConstants measure_oracle_constants(const DuelingOracle& oracle, int per_axis = 50,
                                         BordaSettings settings = {});

}  // namespace duelopt
