#pragma once

#include <Eigen/Core>

#include "duelopt/kernel.hpp"

namespace duelopt {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// GP posterior with constant prior mean under Gaussian observation noise
/// `noise`^2.
///
/// Keeps a lower-triangular factor L of (K + noise^2 I) and w = L^{-1} (y - m).
/// Appending an observation extends L by one row (O(n^2)); a breakdown of the
/// extension falls back to refactorizing from scratch. Queries only read the
/// state, so concurrent readers are safe; appends need exclusive access.
class GpPosterior {
 public:
  GpPosterior(KernelSpec spec, double noise, int dim, double prior_mean = 0.0);

  /// Batch construction from the columns of `x` (d x n).
  static GpPosterior from_data(KernelSpec spec, double noise, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double prior_mean = 0.0);

  void append(const Eigen::Ref<const Eigen::VectorXd>& x, double y);

  Prediction query(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Posterior mean and variance at the columns of `points` (d x m).
  void query_batch(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::VectorXd& mean,
                   Eigen::VectorXd& variance) const;

  /// Replaces the kernel and refactorizes over the current data.
  void set_kernel(const KernelSpec& spec);
  void set_prior_mean(double m);

  const KernelSpec& kernel() const { return spec_; }
  double noise() const { return noise_; }
  double prior_mean() const { return prior_mean_; }
  int dim() const { return dim_; }
  Eigen::Index size() const { return n_; }
  bool empty() const { return n_ == 0; }

  Eigen::MatrixXd points() const { return x_.leftCols(n_); }
  Eigen::VectorXd targets() const { return y_.head(n_); }

  /// Number of times the incremental update fell back to a full rebuild.
  int rebuild_count() const { return rebuilds_; }

 private:
  void reserve(Eigen::Index capacity);
  void refactorize();

  KernelSpec spec_;
  double noise_;
  int dim_;
  double prior_mean_;
  Eigen::Index n_ = 0;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd whitened_;
  int rebuilds_ = 0;
};

/// Value-semantics append: returns a copy of `gp` extended by (x, y).
GpPosterior posterior_append(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x,
                             double y);

/// Convenience wrapper over GpPosterior::query.
Prediction posterior_query(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace duelopt
