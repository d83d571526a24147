#include "duelopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace duelopt {

namespace {

constexpr double kVarianceClamp = 1e-10;

double clamp_variance(double v) {
  // Values within the clamp band below zero are rounding noise near data points.
  if (v < 0.0 && v > -kVarianceClamp) return 0.0;
  return std::max(v, 0.0);
}

}  // namespace

GpPosterior::GpPosterior(KernelSpec spec, double noise, int dim, double prior_mean)
    : spec_(spec), noise_(noise), dim_(dim), prior_mean_(prior_mean) {
  spec_.validate();
  if (!(noise_ > 0.0)) throw std::invalid_argument("GpPosterior: noise must be positive");
  if (dim_ < 1) throw std::invalid_argument("GpPosterior: dimension must be >= 1");
  reserve(16);
}

GpPosterior GpPosterior::from_data(KernelSpec spec, double noise, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y, double prior_mean) {
  if (x.cols() != y.size()) throw std::invalid_argument("from_data: |X| != |Y|");
  GpPosterior gp(spec, noise, static_cast<int>(x.rows()), prior_mean);
  gp.reserve(std::max<Eigen::Index>(16, x.cols()));
  gp.n_ = x.cols();
  gp.x_.leftCols(gp.n_) = x;
  gp.y_.head(gp.n_) = y;
  gp.refactorize();
  return gp;
}

void GpPosterior::reserve(Eigen::Index capacity) {
  if (capacity <= x_.cols()) return;
  Eigen::MatrixXd x(dim_, capacity);
  Eigen::VectorXd y(capacity);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(capacity, capacity);
  Eigen::VectorXd w(capacity);
  if (n_ > 0) {
    x.leftCols(n_) = x_.leftCols(n_);
    y.head(n_) = y_.head(n_);
    chol.topLeftCorner(n_, n_) = chol_.topLeftCorner(n_, n_);
    w.head(n_) = whitened_.head(n_);
  }
  x_ = std::move(x);
  y_ = std::move(y);
  chol_ = std::move(chol);
  whitened_ = std::move(w);
}

void GpPosterior::refactorize() {
  if (n_ == 0) return;
  const auto pts = x_.leftCols(n_);
  Eigen::MatrixXd k = kernel_gram(spec_, pts);
  k.diagonal().array() += noise_ * noise_;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd kk = k;
    if (jitter > 0.0) kk.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kk);
    if (llt.info() == Eigen::Success) {
      chol_.topLeftCorner(n_, n_) = llt.matrixL();
      auto l = chol_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>();
      whitened_.head(n_) = l.solve((y_.head(n_).array() - prior_mean_).matrix());
      return;
    }
    jitter = jitter == 0.0 ? 1e-12 * (1.0 + k.diagonal().maxCoeff()) : jitter * 10.0;
  }
  throw std::runtime_error("GpPosterior: covariance not factorizable");
}

void GpPosterior::append(const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  if (x.size() != dim_) throw std::invalid_argument("GpPosterior::append: dimension mismatch");
  if (n_ == x_.cols()) reserve(2 * x_.cols());

  Eigen::VectorXd row;
  double diag_sq = kernel_diag(spec_, x) + noise_ * noise_;
  if (n_ > 0) {
    Eigen::VectorXd k = kernel_cross(spec_, x_.leftCols(n_), x).col(0);
    row = chol_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solve(k);
    diag_sq -= row.squaredNorm();
  }
  x_.col(n_) = x;
  y_(n_) = y;
  // With noise > 0 the Schur complement is at least noise^2; anything far
  // below that means the factor has drifted.
  if (!(diag_sq > 1e-3 * noise_ * noise_)) {
    ++n_;
    ++rebuilds_;
    refactorize();
    return;
  }
  const double diag = std::sqrt(diag_sq);
  if (n_ > 0) chol_.row(n_).head(n_) = row.transpose();
  chol_(n_, n_) = diag;
  const double centered = y - prior_mean_;
  whitened_(n_) = (n_ > 0 ? centered - row.dot(whitened_.head(n_)) : centered) / diag;
  ++n_;
}

void GpPosterior::query_batch(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
  if (points.rows() != dim_) throw std::invalid_argument("query_batch: dimension mismatch");
  const Eigen::Index m = points.cols();
  variance.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) variance(j) = kernel_diag(spec_, points.col(j));
  if (n_ == 0) {
    mean = Eigen::VectorXd::Constant(m, prior_mean_);
    return;
  }
  Eigen::MatrixXd v = kernel_cross(spec_, x_.leftCols(n_), points);
  chol_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solveInPlace(v);
  mean = v.transpose() * whitened_.head(n_);
  mean.array() += prior_mean_;
  variance -= v.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < m; ++j) variance(j) = clamp_variance(variance(j));
}

Prediction GpPosterior::query(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  query_batch(x, mean, var);
  return {mean(0), var(0)};
}

void GpPosterior::set_kernel(const KernelSpec& spec) {
  spec.validate();
  spec_ = spec;
  refactorize();
}

void GpPosterior::set_prior_mean(double m) {
  prior_mean_ = m;
  refactorize();
}

GpPosterior posterior_append(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x,
                             double y) {
  GpPosterior out = gp;
  out.append(x, y);
  return out;
}

Prediction posterior_query(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return gp.query(x);
}

}  // namespace duelopt
