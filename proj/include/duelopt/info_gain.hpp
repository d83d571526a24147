#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "duelopt/kernel.hpp"

namespace duelopt {

/// Greedy estimate of the maximum information gain on a candidate set:
/// values[k-1] = 1/2 log det(I + noise^-2 K_S) for the greedily chosen S, |S| = k.
struct InfoGainCurve {
  Eigen::MatrixXd candidates;
  std::vector<double> values;
  std::vector<int> chosen;
};

/// Incremental greedy maximizer. Each step adds the unchosen candidate with
/// the largest posterior variance, which is the one with the largest marginal
/// gain 1/2 log(1 + var / noise^2). Cost per step is O(|candidates| * step).
class GreedyInfoGain {
 public:
  GreedyInfoGain(KernelSpec spec, Eigen::MatrixXd candidates, double noise);

  /// Runs greedy steps until `n` values are available. Throws if n exceeds
  /// the number of candidates.
  void extend(int n);

  const InfoGainCurve& curve() const { return curve_; }
  const KernelSpec& kernel() const { return spec_; }
  double noise() const { return noise_; }

 private:
  KernelSpec spec_;
  double noise_;
  InfoGainCurve curve_;
  Eigen::VectorXd variance_;
  std::vector<bool> used_;
  // Row k holds the k-th whitened cross-covariance against every candidate.
  Eigen::MatrixXd factors_;
};

/// One-shot greedy curve of length n. Throws std::invalid_argument on an
/// empty candidate set or n > |candidates|.
InfoGainCurve max_info_gain_greedy(const KernelSpec& spec, const Eigen::MatrixXd& candidates, int n,
                                   double noise);

}  // namespace duelopt
