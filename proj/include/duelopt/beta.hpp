#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "duelopt/info_gain.hpp"
#include "duelopt/kernel.hpp"

namespace duelopt {

enum class BetaMode { Theoretical, Heuristic };

struct BetaSettings {
  BetaMode mode = BetaMode::Heuristic;
  double rkhs_bound = 1.0;  // B
  double delta = 0.05;
  double epsilon_heur = 1.0;
  int grid_size = 512;  // initial candidate count for the information-gain curve

  void validate() const;
  bool operator==(const BetaSettings&) const = default;
};

/// Confidence-width multiplier beta_t.
///
/// Heuristic:   0.5 * log(2t + epsilon_heur).
/// Theoretical: 2B + sqrt(2 (gamma_{t-1} + 1 + log(1/delta))), gamma_0 = 0,
///              with gamma from the greedy information-gain curve over a Sobol
///              grid of the unit cube under the current kernel and noise.
/// The curve is extended lazily; when t outgrows the grid the grid is doubled
/// and the curve recomputed.
class BetaSchedule {
 public:
  BetaSchedule(BetaSettings settings, int dim);

  /// Sets the kernel/noise the information-gain curve is computed under.
  /// Drops the cached curve if either changed.
  void set_model(const KernelSpec& spec, double noise);

  double value(int t);

  const BetaSettings& settings() const { return settings_; }

 private:
  double info_gain(int n);

  BetaSettings settings_;
  int dim_;
  KernelSpec spec_;
  double noise_ = 1.0;
  int grid_size_;
  std::shared_ptr<GreedyInfoGain> greedy_;
};

double beta_value(BetaSchedule& schedule, int t);

}  // namespace duelopt
