#include "duelopt/info_gain.hpp"

#include <cmath>
#include <stdexcept>

namespace duelopt {

GreedyInfoGain::GreedyInfoGain(KernelSpec spec, Eigen::MatrixXd candidates, double noise)
    : spec_(spec), noise_(noise) {
  spec_.validate();
  if (candidates.cols() == 0) throw std::invalid_argument("info gain: empty candidate set");
  if (!(noise_ > 0.0)) throw std::invalid_argument("info gain: noise must be positive");
  curve_.candidates = std::move(candidates);
  const Eigen::Index m = curve_.candidates.cols();
  variance_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) variance_(j) = kernel_diag(spec_, curve_.candidates.col(j));
  used_.assign(static_cast<std::size_t>(m), false);
}

void GreedyInfoGain::extend(int n) {
  const Eigen::Index m = curve_.candidates.cols();
  if (n > m) throw std::invalid_argument("info gain: n exceeds the number of candidates");
  const double noise_sq = noise_ * noise_;
  if (factors_.rows() < n) factors_.conservativeResize(n, m);

  while (static_cast<int>(curve_.values.size()) < n) {
    const int step = static_cast<int>(curve_.values.size());
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (used_[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || variance_(j) > variance_(best)) best = j;
    }
    const double var = std::max(variance_(best), 0.0);
    const double gain = 0.5 * std::log1p(var / noise_sq);
    curve_.values.push_back((step > 0 ? curve_.values.back() : 0.0) + gain);
    curve_.chosen.push_back(static_cast<int>(best));
    used_[static_cast<std::size_t>(best)] = true;

    // Rank-one update of every candidate's variance given a noisy look at `best`.
    Eigen::RowVectorXd cov =
        kernel_cross(spec_, curve_.candidates.col(best), curve_.candidates).row(0);
    if (step > 0) cov -= factors_.col(best).head(step).transpose() * factors_.topRows(step);
    const double denom = std::sqrt(var + noise_sq);
    factors_.row(step) = cov / denom;
    variance_ -= factors_.row(step).transpose().cwiseAbs2();
  }
}

InfoGainCurve max_info_gain_greedy(const KernelSpec& spec, const Eigen::MatrixXd& candidates, int n,
                                   double noise) {
  if (candidates.cols() == 0) throw std::invalid_argument("info gain: empty candidate set");
  if (n < 0 || n > candidates.cols()) {
    throw std::invalid_argument("info gain: n must lie in [0, |candidates|]");
  }
  GreedyInfoGain greedy(spec, candidates, noise);
  greedy.extend(n);
  return greedy.curve();
}

}  // namespace duelopt
