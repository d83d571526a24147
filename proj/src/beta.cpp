#include "duelopt/beta.hpp"

#include <cmath>
#include <stdexcept>

#include "duelopt/sampling.hpp"

namespace duelopt {

void BetaSettings::validate() const {
  if (!(rkhs_bound > 0.0)) throw std::invalid_argument("beta: B must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta: delta must lie in (0,1)");
  if (!(epsilon_heur > 0.0)) throw std::invalid_argument("beta: epsilon_heur must be positive");
  if (grid_size < 1) throw std::invalid_argument("beta: grid_size must be >= 1");
}

BetaSchedule::BetaSchedule(BetaSettings settings, int dim)
    : settings_(settings), dim_(dim), grid_size_(settings.grid_size) {
  settings_.validate();
}

void BetaSchedule::set_model(const KernelSpec& spec, double noise) {
  if (greedy_ && spec == spec_ && noise == noise_) return;
  spec_ = spec;
  noise_ = noise;
  greedy_.reset();
}

double BetaSchedule::info_gain(int n) {
  if (n <= 0) return 0.0;
  while (n > grid_size_) {
    grid_size_ *= 2;
    greedy_.reset();
  }
  if (!greedy_) {
    greedy_ = std::make_shared<GreedyInfoGain>(spec_, sobol_points(dim_, grid_size_), noise_);
  }
  greedy_->extend(n);
  return greedy_->curve().values[static_cast<std::size_t>(n - 1)];
}

double BetaSchedule::value(int t) {
  if (t < 1) throw std::invalid_argument("beta: t must be >= 1");
  if (settings_.mode == BetaMode::Heuristic) {
    return 0.5 * std::log(2.0 * t + settings_.epsilon_heur);
  }
  const double gamma = info_gain(t - 1);
  return 2.0 * settings_.rkhs_bound +
         std::sqrt(2.0 * (gamma + 1.0 + std::log(1.0 / settings_.delta)));
}

double beta_value(BetaSchedule& schedule, int t) { return schedule.value(t); }

}  // namespace duelopt
