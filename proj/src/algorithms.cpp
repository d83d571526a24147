#include "duelopt/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duelopt {

namespace {

constexpr double kCountSlack = 1e-9;

long long affordable_count(double budget, double unit) {
  if (budget <= 0.0) return 0;
  return std::max(0LL, static_cast<long long>(std::floor(budget / unit * (1.0 + kCountSlack))));
}

int acquisition_evals(const AlgConfig& config, const AlgState& state) {
  return config.acq_evals_per_dim * state.domain.dim();
}

// Refits kernel hyperparameters on (a strided subset of) the GP's data.
// Label scale bounds are given relative to the sample variance of the data.
void refit(GpPosterior& gp, BetaSchedule& beta, const HyperBounds& bounds, bool relative_scale,
           const AlgConfig& config) {
  const Eigen::Index n = gp.size();
  if (n == 0) return;
  Eigen::MatrixXd x = gp.points();
  Eigen::VectorXd y = gp.targets().array() - gp.prior_mean();
  const Eigen::Index m = config.refit_max_points;
  if (n > m) {
    Eigen::MatrixXd xs(x.rows(), m);
    Eigen::VectorXd ys(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = i * n / m;
      xs.col(i) = x.col(j);
      ys(i) = y(j);
    }
    x = std::move(xs);
    y = std::move(ys);
  }
  HyperBounds b = bounds;
  if (relative_scale) {
    const double var = y.size() > 1 ? (y.array() - y.mean()).square().mean() : 0.0;
    const double ref = var > 0.0 ? var : 1.0;
    b.scale_lo *= ref;
    b.scale_hi *= ref;
  }
  const KernelSpec spec = fit_hyperparams(x, y, gp.noise(), gp.kernel(), b, config.hyper_evals);
  gp.set_kernel(spec);
  beta.set_model(spec, gp.noise());
}

void refit_label(AlgState& state, const AlgConfig& config) {
  refit(state.gp_label, state.beta_label, config.bounds_label, true, config);
}

void refit_comp(AlgState& state, const AlgConfig& config) {
  refit(state.gp_comp, state.beta_comp, config.bounds_comp, false, config);
}

double sd_at(const GpPosterior& gp, const Eigen::VectorXd& u, double* mean = nullptr) {
  const Prediction p = gp.query(u);
  if (mean) *mean = p.mean;
  return std::sqrt(p.variance);
}

}  // namespace

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::GPUcb: return "GPUcb";
    case Policy::CompGpUcb: return "CompGpUcb";
    case Policy::CompGpUcbAdaptive: return "CompGpUcbAdaptive";
    case Policy::ComparisonOnly: return "ComparisonOnly";
  }
  return "?";
}

Policy policy_from_string(std::string_view name) {
  if (name == "GPUcb") return Policy::GPUcb;
  if (name == "CompGpUcb") return Policy::CompGpUcb;
  if (name == "CompGpUcbAdaptive") return Policy::CompGpUcbAdaptive;
  if (name == "ComparisonOnly") return Policy::ComparisonOnly;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

bool uses_comparisons(Policy policy) { return policy != Policy::GPUcb; }

void AlgConfig::validate() const {
  if (!(zeta >= 0.0)) throw std::invalid_argument("zeta must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (l2 && !(*l2 > 0.0)) throw std::invalid_argument("l2 must be positive");
  if (!(zeta0 > 0.0) || !(zeta_max > 0.0)) {
    throw std::invalid_argument("zeta0 and zeta_max must be positive");
  }
  if (zeta0 > zeta_max) throw std::invalid_argument("zeta0 must not exceed zeta_max");
  beta_label.validate();
  beta_comp.validate();
  kernel_label.validate();
  kernel_comp.validate();
  bounds_label.validate();
  bounds_comp.validate();
  if (!(comp_noise > 0.0)) throw std::invalid_argument("comp_noise must be positive");
  if (label_noise && !(*label_noise > 0.0)) throw std::invalid_argument("label_noise must be positive");
  if (acq_evals_per_dim < 1) throw std::invalid_argument("acq_evals_per_dim must be >= 1");
  if (!(warm_start >= 0.0)) throw std::invalid_argument("warm_start must be >= 0");
  if (!(warm_comp_fraction >= 0.0 && warm_comp_fraction <= 1.0)) {
    throw std::invalid_argument("warm_comp_fraction must lie in [0,1]");
  }
  if (refit_every_comp < 0 || refit_every_label < 0) {
    throw std::invalid_argument("refit intervals must be >= 0");
  }
  if (refit_max_points < 2) throw std::invalid_argument("refit_max_points must be >= 2");
  if (hyper_evals < 1) throw std::invalid_argument("hyper_evals must be >= 1");
}

AlgState::AlgState(const AlgConfig& config, const DuelingOracle& oracle, const CostModel& cost,
                   std::uint64_t seed)
    : gp_comp(config.kernel_comp, config.comp_noise, oracle.domain().dim(), 0.5),
      gp_label(config.kernel_label,
               config.label_noise ? *config.label_noise : std::max(oracle.eta(), 1e-6),
               oracle.domain().dim()),
      beta_comp(config.beta_comp, oracle.domain().dim()),
      beta_label(config.beta_label, oracle.domain().dim()),
      zeta_k(config.zeta0),
      ledger(cost),
      rng(seed),
      domain(oracle.domain()) {
  beta_comp.set_model(gp_comp.kernel(), gp_comp.noise());
  beta_label.set_model(gp_label.kernel(), gp_label.noise());
  const long long levels = std::max(
      1LL, static_cast<long long>(std::ceil(std::log2(config.zeta_max / config.zeta0) - kCountSlack)));
  const long long n_lower = n_bounds(cost).n_lower;
  label_threshold = std::max(1LL, (n_lower + 2 * levels - 1) / (2 * levels));
}

Eigen::VectorXd ucb_batch(const GpPosterior& gp, const Eigen::MatrixXd& u, double beta) {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  gp.query_batch(u, mean, var);
  return mean.array() + beta * var.array().sqrt();
}

double phi_value(const AlgState& state, const Eigen::VectorXd& u, double beta_comp, double c_zeta) {
  if (!state.fr_lcb) throw std::logic_error("phi_value: no f_r lower bound yet");
  double mean = 0.0;
  const double sd = sd_at(state.gp_comp, u, &mean);
  return mean + beta_comp * sd - *state.fr_lcb + c_zeta;
}

double zeta_allowance(const AlgState& state, const AlgConfig& config) {
  const double l2 = config.l2.value_or(0.0);
  if (config.policy == Policy::CompGpUcbAdaptive) return 2.0 * l2 * state.zeta_k;
  return l2 * config.zeta;
}

QueryDecision gp_ucb_step(AlgState& state, const AlgConfig& config) {
  const double beta = state.beta_label.value(static_cast<int>(state.t()));
  const BoxDomain unit = BoxDomain::unit(state.domain.dim());
  const GpPosterior& gp = state.gp_label;
  const OptResult best = direct_maximize(
      BatchFunction([&](const Eigen::MatrixXd& u) { return ucb_batch(gp, u, beta); }), unit,
      acquisition_evals(config, state));
  QueryDecision d;
  d.kind = QueryKind::Label;
  d.x = state.domain.from_unit(best.argmax);
  d.phase = Phase::Two;
  return d;
}

std::pair<QueryDecision, bool> phase1_step(AlgState& state, const AlgConfig& config) {
  if (state.phase != Phase::One) throw std::logic_error("phase1_step outside phase one");
  const double beta = state.beta_comp.value(static_cast<int>(state.t()));
  const BoxDomain unit = BoxDomain::unit(state.domain.dim());
  const GpPosterior& gp = state.gp_comp;
  const OptResult best = direct_maximize(
      BatchFunction([&](const Eigen::MatrixXd& u) { return ucb_batch(gp, u, beta); }), unit,
      acquisition_evals(config, state));

  state.last_x_unit = best.argmax;
  state.last_sd_comp = sd_at(gp, best.argmax, &state.last_mean_comp);
  state.last_beta_comp = beta;

  QueryDecision d;
  d.kind = QueryKind::Comparison;
  d.x = state.domain.from_unit(best.argmax);
  d.x2 = state.rng.uniform_point(state.domain.lower(), state.domain.upper());
  d.phase = Phase::One;
  // The comparison-only policy is the gamma = 0 regime and never leaves phase one.
  const bool exit = config.policy != Policy::ComparisonOnly &&
                    beta * state.last_sd_comp <= config.gamma;
  return {std::move(d), exit};
}

double compute_fr_lcb(AlgState& state) {
  if (state.phase == Phase::Two) throw std::logic_error("compute_fr_lcb called in phase two");
  state.fr_lcb = state.last_mean_comp - state.last_beta_comp * state.last_sd_comp;
  return *state.fr_lcb;
}

QueryDecision phase2_step(AlgState& state, const AlgConfig& config, Phase2Info* info) {
  if (state.phase != Phase::Two || !state.fr_lcb) {
    throw std::logic_error("phase2_step needs phase two and an f_r lower bound");
  }
  const int t = static_cast<int>(state.t());
  const double beta_r = state.beta_comp.value(t);
  const double beta_l = state.beta_label.value(t);
  const double c = zeta_allowance(state, config);
  const double lcb = *state.fr_lcb;
  const BoxDomain unit = BoxDomain::unit(state.domain.dim());
  const GpPosterior& gl = state.gp_label;
  const GpPosterior& gc = state.gp_comp;
  const BatchFunction objective = [&](const Eigen::MatrixXd& u) { return ucb_batch(gl, u, beta_l); };
  const BatchFunction constraint = [&](const Eigen::MatrixXd& u) -> Eigen::VectorXd {
    return ucb_batch(gc, u, beta_r).array() - lcb + c;
  };
  const int evals = acquisition_evals(config, state);
  OptResult best = constrained_maximize(objective, constraint, unit, evals);
  const bool fallback = !best.feasible;
  if (fallback) {
    ++state.fallbacks;
    best = direct_maximize(objective, unit, evals);
  }

  double mean = 0.0;
  const double sd = sd_at(gc, best.argmax, &mean);
  const double width = beta_r * sd;
  if (config.refresh_fr_lcb) state.fr_lcb = std::max(*state.fr_lcb, mean - width);

  QueryDecision d;
  d.x = state.domain.from_unit(best.argmax);
  d.phase = Phase::Two;
  if (width >= config.gamma) {
    d.kind = QueryKind::Comparison;
    d.x2 = state.rng.uniform_point(state.domain.lower(), state.domain.upper());
  } else {
    d.kind = QueryKind::Label;
  }
  if (info) {
    info->beta_comp = beta_r;
    info->c_zeta = c;
    info->phi_at_x = mean + width - lcb + c;
    info->comp_width = width;
    info->fallback = fallback;
  }
  return d;
}

bool query_dispatch(const QueryDecision& decision, const DuelingOracle& oracle, AlgState& state) {
  if (decision.kind == QueryKind::Comparison && !decision.x2) {
    throw std::invalid_argument("query_dispatch: comparison without opponent");
  }
  if (!charge(state.ledger, decision)) {
    state.finished = true;
    state.stop_reason = "budget";
    return false;
  }
  const Eigen::VectorXd u = state.domain.to_unit(decision.x);
  double outcome = 0.0;
  if (decision.kind == QueryKind::Comparison) {
    outcome = compare(oracle, decision.x, *decision.x2, state.rng);
    state.gp_comp.append(u, outcome);
  } else {
    outcome = label_query(oracle, decision.x, state.rng);
    state.gp_label.append(u, outcome);
  }
  TraceEntry e;
  e.kind = decision.kind;
  e.phase = decision.phase;
  e.x = decision.x;
  e.x2 = decision.x2;
  e.outcome = outcome;
  e.cost = state.ledger.model().cost(decision.kind);
  e.cumulative_cost = state.ledger.spent();
  e.regret = instantaneous_regret(decision, oracle);
  state.trace.record(std::move(e));
  return true;
}

void zeta_schedule_step(AlgState& state, const AlgConfig& config) {
  ++state.labels_at_level;
  if (state.labels_at_level >= state.label_threshold) {
    state.labels_at_level = 0;
    state.zeta_k *= 2.0;
    ++state.k;
  }
  if (state.zeta_k > config.zeta_max) {
    state.finished = true;
    state.stop_reason = "zeta_max";
  }
}

RunResult run(const AlgConfig& config, const DuelingOracle& oracle, const CostModel& cost,
              std::uint64_t seed, const StepObserver& observer) {
  config.validate();
  cost.validate(true);
  if (!(cost.budget > config.warm_start)) {
    throw std::invalid_argument("budget must exceed the warm-start budget");
  }
  const bool filtered =
      config.policy == Policy::CompGpUcb || config.policy == Policy::CompGpUcbAdaptive;
  if (filtered && !config.l2) throw std::invalid_argument("l2 must be set for " +
                                                          std::string(to_string(config.policy)));

  AlgState state(config, oracle, cost, seed);
  RunResult result;

  // Warm start: uniform random queries, comparisons first.
  double comp_share = config.warm_start * config.warm_comp_fraction;
  if (config.policy == Policy::GPUcb) comp_share = 0.0;
  if (config.policy == Policy::ComparisonOnly) comp_share = config.warm_start;
  const long long n_comp = affordable_count(comp_share, cost.comp_cost);
  const long long n_label =
      affordable_count(config.warm_start - static_cast<double>(n_comp) * cost.comp_cost,
                       cost.label_cost);
  for (long long i = 0; i < n_comp + n_label; ++i) {
    QueryDecision d;
    d.kind = i < n_comp ? QueryKind::Comparison : QueryKind::Label;
    d.phase = Phase::WarmStart;
    d.x = state.rng.uniform_point(state.domain.lower(), state.domain.upper());
    if (d.kind == QueryKind::Comparison) {
      d.x2 = state.rng.uniform_point(state.domain.lower(), state.domain.upper());
    }
    if (!query_dispatch(d, oracle, state)) break;
  }
  if (!state.gp_label.empty()) {
    state.gp_label.set_prior_mean(state.gp_label.targets().mean());
    refit_label(state, config);
  }
  if (!state.gp_comp.empty()) refit_comp(state, config);

  state.phase = config.policy == Policy::GPUcb ? Phase::Two : Phase::One;
  state.finished = false;
  state.stop_reason.clear();

  while (!state.finished) {
    ++state.steps;
    const long long done = state.steps - 1;
    if (done > 0 && config.refit_every_comp > 0 && done % config.refit_every_comp == 0) {
      refit_comp(state, config);
    }
    if (done > 0 && config.refit_every_label > 0 && done % config.refit_every_label == 0) {
      refit_label(state, config);
    }

    QueryDecision decision;
    double beta_r = 0.0;
    double beta_l = 0.0;
    double c = 0.0;
    bool fallback = false;
    bool leave_phase_one = false;
    if (config.policy == Policy::GPUcb) {
      decision = gp_ucb_step(state, config);
      beta_l = state.beta_label.value(static_cast<int>(state.t()));
    } else if (state.phase == Phase::One) {
      auto [d, exit] = phase1_step(state, config);
      decision = std::move(d);
      beta_r = state.last_beta_comp;
      leave_phase_one = exit;
    } else {
      Phase2Info info;
      decision = phase2_step(state, config, &info);
      beta_r = info.beta_comp;
      beta_l = state.beta_label.value(static_cast<int>(state.t()));
      c = info.c_zeta;
      fallback = info.fallback;
    }

    if (observer) observer(StepInfo{state, decision, beta_r, beta_l, c, fallback});
    const long long t = state.t();
    if (!query_dispatch(decision, oracle, state)) break;

    if (leave_phase_one) {
      // Uses the pre-query values saved by phase1_step.
      compute_fr_lcb(state);
      state.phase = Phase::Two;
      result.phase_one_exit = t;
    }
    if (config.policy == Policy::CompGpUcbAdaptive && state.phase == Phase::Two &&
        decision.kind == QueryKind::Label) {
      zeta_schedule_step(state, config);
    }
  }

  result.trace = std::move(state.trace);
  result.spent = state.ledger.spent();
  result.labels = state.ledger.labels();
  result.comparisons = state.ledger.comparisons();
  result.fallbacks = state.fallbacks;
  result.fr_lcb = state.fr_lcb;
  result.stop_reason = state.stop_reason;
  return result;
}

}  // namespace duelopt
