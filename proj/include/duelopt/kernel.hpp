#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace duelopt {

enum class KernelFamily { Linear, SquaredExponential, Matern };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Covariance function parameters. `lengthscale` is in input units,
/// `scale` is the prior output variance. `nu` is only read for Matern.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double lengthscale = 1.0;
  double scale = 1.0;
  double nu = 2.5;

  /// Throws std::invalid_argument on non-positive parameters.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

/// k(a, b). Throws std::invalid_argument on dimension mismatch.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b);

/// Prior variance k(x, x).
double kernel_diag(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Matern correlation written with the modified Bessel function of the
/// second kind, evaluated at scaled distance r / lengthscale. Returns 1 at 0.
double matern_bessel_form(double nu, double scaled_distance);

/// Cross-covariance between the columns of `a` (d x n) and `b` (d x m).
Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Gram matrix over the columns of `x`.
Eigen::MatrixXd kernel_gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace duelopt
