#pragma once

#include <optional>

#include <Eigen/Core>

#include "duelopt/benchmarks.hpp"
#include "duelopt/direct.hpp"
#include "duelopt/link.hpp"
#include "duelopt/random.hpp"

namespace duelopt {

struct Optimum {
  Eigen::VectorXd x;
  double value = 0.0;
};

/// Maximizes `f` over `domain`: a rectangle search with `evals` evaluations
/// followed by coordinate-wise golden-section refinement.
Optimum true_optimum(const PointFunction& f, const BoxDomain& domain, int evals = 100000);

/// Simulated environment. Labels are f(x) + Uniform[-eta, eta]; a comparison
/// of (x, x2) is won by x with probability link(f_c(x) - f_c(x2)).
/// Immutable after construction; both optima are computed up front.
class DuelingOracle {
 public:
  DuelingOracle(PointFunction target, PointFunction comparison, LinkFunction link, double eta,
                BoxDomain domain, int optimum_evals = 100000);

  double target(const Eigen::VectorXd& x) const { return target_(x); }
  double comparison(const Eigen::VectorXd& x) const { return comparison_(x); }

  /// Bernoulli parameter of compare(x, x2).
  double win_probability(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const;

  const LinkFunction& link() const { return link_; }
  double eta() const { return eta_; }
  const BoxDomain& domain() const { return domain_; }
  const Optimum& target_optimum() const { return target_opt_; }
  const Optimum& comparison_optimum() const { return comparison_opt_; }
  const PointFunction& target_function() const { return target_; }
  const PointFunction& comparison_function() const { return comparison_; }

 private:
  PointFunction target_;
  PointFunction comparison_;
  LinkFunction link_;
  double eta_;
  BoxDomain domain_;
  Optimum target_opt_;
  Optimum comparison_opt_;
};

/// f(x) + eps, eps ~ Uniform[-eta, eta]. Throws for x outside the domain.
double label_query(const DuelingOracle& oracle, const Eigen::VectorXd& x, Rng& rng);

/// 1 if x beats x2, else 0. Throws for points outside the domain.
int compare(const DuelingOracle& oracle, const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
            Rng& rng);

/// Range (max - min) of `f` over `samples` uniform points from a fixed stream.
double sampled_range(const PointFunction& f, const BoxDomain& domain, int samples = 10000);

struct OracleOptions {
  LinkFamily link = LinkFamily::Logistic;
  std::optional<double> temperature;  // default: sampled range of f_c / 4 (range for Linear)
  std::optional<double> eta;          // default: 0.05 * sampled range of f
  Fidelity comparison_fidelity = Fidelity::Low;
  int optimum_evals = 100000;

  bool operator==(const OracleOptions&) const = default;
};

/// Target is the high fidelity; comparisons come from `comparison_fidelity`.
/// Synthetic1D has a single fidelity, so f_c = f there.
DuelingOracle make_benchmark_oracle(Benchmark benchmark, const OracleOptions& options = {});

}  // namespace duelopt
