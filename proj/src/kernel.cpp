#include "duelopt/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace duelopt {

namespace {

// Closed forms of the Bessel expression for the common half-integer orders.
double matern_correlation(double nu, double scaled) {
  if (scaled <= 0.0) return 1.0;
  if (nu == 0.5) return std::exp(-scaled);
  if (nu == 1.5) {
    const double s = std::sqrt(3.0) * scaled;
    return (1.0 + s) * std::exp(-s);
  }
  if (nu == 2.5) {
    const double s = std::sqrt(5.0) * scaled;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
  }
  return matern_bessel_form(nu, scaled);
}

double stationary_value(const KernelSpec& spec, double sq_dist) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return spec.scale * std::exp(-0.5 * sq_dist / (spec.lengthscale * spec.lengthscale));
    case KernelFamily::Matern:
      return spec.scale * matern_correlation(spec.nu, std::sqrt(sq_dist) / spec.lengthscale);
    case KernelFamily::Linear:
      break;
  }
  throw std::logic_error("stationary_value: linear kernel is not stationary");
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return "Linear";
    case KernelFamily::SquaredExponential: return "SE";
    case KernelFamily::Matern: return "Matern";
  }
  return "?";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "Linear") return KernelFamily::Linear;
  if (name == "SE") return KernelFamily::SquaredExponential;
  if (name == "Matern") return KernelFamily::Matern;
  throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0)) throw std::invalid_argument("kernel lengthscale must be positive");
  if (!(scale > 0.0)) throw std::invalid_argument("kernel scale must be positive");
  if (family == KernelFamily::Matern && !(nu > 0.0)) {
    throw std::invalid_argument("Matern smoothness nu must be positive");
  }
}

double matern_bessel_form(double nu, double scaled_distance) {
  if (scaled_distance <= 0.0) return 1.0;
  const double z = std::sqrt(2.0 * nu) * scaled_distance;
  // K_nu underflows long before the power term overflows; both vanish together.
  if (z > 700.0) return 0.0;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  if (spec.family == KernelFamily::Linear) return spec.scale * a.dot(b);
  return stationary_value(spec, (a - b).squaredNorm());
}

double kernel_diag(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (spec.family == KernelFamily::Linear) return spec.scale * x.squaredNorm();
  return spec.scale;
}

Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("kernel_cross: dimension mismatch");
  if (spec.family == KernelFamily::Linear) return spec.scale * (a.transpose() * b);

  const Eigen::Index n = a.cols();
  const Eigen::Index m = b.cols();
  const Eigen::Index d = a.rows();
  Eigen::MatrixXd out(n, m);
  if (spec.family == KernelFamily::SquaredExponential) {
    const double inv = -0.5 / (spec.lengthscale * spec.lengthscale);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double diff = a(k, i) - b(k, j);
          sq += diff * diff;
        }
        out(i, j) = sq * inv;
      }
    }
    out = spec.scale * out.array().exp();
    return out;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) = stationary_value(spec, (a.col(i) - b.col(j)).squaredNorm());
    }
  }
  return out;
}

Eigen::MatrixXd kernel_gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd gram = kernel_cross(spec, x, x);
  // Exact symmetry; the pairwise loop above can differ in the last ulp.
  gram = 0.5 * (gram + gram.transpose()).eval();
  return gram;
}

}  // namespace duelopt
