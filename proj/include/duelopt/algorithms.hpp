#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "duelopt/accounting.hpp"
#include "duelopt/beta.hpp"
#include "duelopt/gp.hpp"
#include "duelopt/hyperfit.hpp"
#include "duelopt/oracle.hpp"

namespace duelopt {

enum class Policy { GPUcb, CompGpUcb, CompGpUcbAdaptive, ComparisonOnly };

std::string_view to_string(Policy policy);
Policy policy_from_string(std::string_view name);
bool uses_comparisons(Policy policy);

struct AlgConfig {
  Policy policy = Policy::CompGpUcb;

  double zeta = 0.0;   // comparison bias allowance (known-zeta variant)
  double gamma = 0.25;  // comparison exploration threshold
  // Borda-to-comparison Lipschitz constant used in the filter. Must be set
  // before run(); the harness fills it from the oracle when left empty.
  std::optional<double> l2;
  double zeta0 = 0.05;    // adaptive variant: first bias level
  double zeta_max = 3.2;  // adaptive variant: last bias level

  BetaSettings beta_label;
  BetaSettings beta_comp;
  KernelSpec kernel_label;  // family and starting hyperparameters
  KernelSpec kernel_comp;
  HyperBounds bounds_label;  // scale bounds are relative to the label variance
  HyperBounds bounds_comp;
  double comp_noise = 0.5;  // noise of the GP fed with 0/1 outcomes
  std::optional<double> label_noise;  // default: the oracle's eta

  int acq_evals_per_dim = 500;
  double warm_start = 10.0;            // budget spent on uniform random queries
  double warm_comp_fraction = 0.5;     // share of the warm start on comparisons
  int refit_every_comp = 20;           // 0 disables periodic refits
  int refit_every_label = 5;
  int refit_max_points = 256;
  int hyper_evals = 200;
  bool refresh_fr_lcb = false;

  void validate() const;
  bool operator==(const AlgConfig&) const = default;
};

/// Mutable state of one run. Both GPs live on the unit cube of the oracle's
/// domain; trace and decisions use domain coordinates.
struct AlgState {
  AlgState(const AlgConfig& config, const DuelingOracle& oracle, const CostModel& cost,
           std::uint64_t seed);

  Phase phase = Phase::WarmStart;
  GpPosterior gp_comp;
  GpPosterior gp_label;
  BetaSchedule beta_comp;
  BetaSchedule beta_label;
  std::optional<double> fr_lcb;

  double zeta_k = 0.0;
  int k = 0;
  long long labels_at_level = 0;
  long long label_threshold = 0;  // labels per zeta level (adaptive)

  long long steps = 0;  // policy iterations after the warm start
  Ledger ledger;
  RegretTrace trace;
  Rng rng;
  BoxDomain domain;
  int fallbacks = 0;
  bool finished = false;
  std::string stop_reason;

  // Pre-query comparison-GP values at the last phase-one point.
  Eigen::VectorXd last_x_unit;
  double last_mean_comp = 0.0;
  double last_sd_comp = 0.0;
  double last_beta_comp = 0.0;

  /// Index of the next query (queries issued so far + 1).
  long long t() const { return ledger.queries() + 1; }
};

/// Upper confidence bound mu + beta * sd of `gp` at the columns of `u`.
Eigen::VectorXd ucb_batch(const GpPosterior& gp, const Eigen::MatrixXd& u, double beta);

/// Filter value mu_r + beta_r sd_r - f_r_lcb + c at unit-cube point `u`.
double phi_value(const AlgState& state, const Eigen::VectorXd& u, double beta_comp, double c_zeta);

/// Bias allowance of the filter: L2 zeta, or 2 L2 zeta_k for the adaptive policy.
double zeta_allowance(const AlgState& state, const AlgConfig& config);

QueryDecision gp_ucb_step(AlgState& state, const AlgConfig& config);

/// Returns the comparison decision and whether the exit test
/// beta_r sd_r(x_t) <= gamma holds at the pre-query posterior.
std::pair<QueryDecision, bool> phase1_step(AlgState& state, const AlgConfig& config);

/// f_r lower bound at the last phase-one point; stores it in the state.
/// Throws std::logic_error in phase two.
double compute_fr_lcb(AlgState& state);

struct Phase2Info {
  double beta_comp = 0.0;
  double c_zeta = 0.0;
  double phi_at_x = 0.0;
  double comp_width = 0.0;  // beta_r sd_r(x_t)
  bool fallback = false;
};

QueryDecision phase2_step(AlgState& state, const AlgConfig& config, Phase2Info* info = nullptr);

/// Charges the ledger and, if accepted, draws the outcome, updates the
/// matching GP and records the trace entry. Returns false when the budget
/// rejected the query; nothing is issued then and the state is finished.
bool query_dispatch(const QueryDecision& decision, const DuelingOracle& oracle, AlgState& state);

/// Counts a label at the current level and doubles zeta_k when the level's
/// share is used up. Sets `finished` once zeta_k exceeds zeta_max.
void zeta_schedule_step(AlgState& state, const AlgConfig& config);

/// Passed to the observer before each post-warm-start query is dispatched;
/// the GPs in `state` are still the pre-query posteriors.
struct StepInfo {
  const AlgState& state;
  const QueryDecision& decision;
  double beta_comp = 0.0;
  double beta_label = 0.0;
  double c_zeta = 0.0;
  bool fallback = false;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct RunResult {
  RegretTrace trace;
  double spent = 0.0;
  long long labels = 0;
  long long comparisons = 0;
  int fallbacks = 0;
  std::optional<long long> phase_one_exit;  // t at which phase one ended
  std::optional<double> fr_lcb;
  std::string stop_reason;
};

/// Warm start, hyperparameter fit, then policy steps until the budget blocks
/// the next query (or the adaptive schedule passes zeta_max).
RunResult run(const AlgConfig& config, const DuelingOracle& oracle, const CostModel& cost,
              std::uint64_t seed, const StepObserver& observer = {});

}  // namespace duelopt
