#pragma once

#include <functional>

#include <Eigen/Core>

namespace duelopt {

/// Axis-aligned box [lower, upper] with lower_i < upper_i.
class BoxDomain {
 public:
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  static BoxDomain unit(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd width() const { return upper_ - lower_; }
  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Affine maps between the box and the unit cube.
  Eigen::VectorXd to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::MatrixXd from_unit_cols(const Eigen::Ref<const Eigen::MatrixXd>& u) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

struct OptResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int evals_used = 0;
  bool feasible = true;
};

using PointFunction = std::function<double(const Eigen::VectorXd&)>;
/// Evaluates every column of a d x m matrix; returns m values.
using BatchFunction = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

BatchFunction batched(PointFunction f);

/// Dividing-rectangles global maximization over `domain`.
///
/// Each iteration picks the potentially optimal rectangles (lower convex hull
/// of best value against diameter, with the relative epsilon test) and
/// trisects them along their longest sides. All new centers of an iteration
/// are handed to `objective` as one batch. The search is deterministic: ties
/// go to the lowest rectangle index. The final batch is cut short at
/// `max_evals`, so a larger budget always evaluates a superset of points.
OptResult direct_maximize(const BatchFunction& objective, const BoxDomain& domain, int max_evals);
OptResult direct_maximize(const PointFunction& objective, const BoxDomain& domain, int max_evals);

/// Maximizes `objective` over {x : constraint(x) >= 0}.
///
/// Infeasible rectangles are ranked with a penalty value of
/// (lowest feasible value seen - 10 * feasible range). Until a feasible point
/// turns up, rectangles are ranked by constraint value instead. If nothing
/// feasible was evaluated, `feasible` is false and the result carries the best
/// objective value seen.
OptResult constrained_maximize(const BatchFunction& objective, const BatchFunction& constraint,
                               const BoxDomain& domain, int max_evals);
OptResult constrained_maximize(const PointFunction& objective, const PointFunction& constraint,
                               const BoxDomain& domain, int max_evals);

/// Golden-section refinement along each coordinate in turn, restricted to a
/// window of half-width `radius` (box units) around `start`.
OptResult coordinate_refine(const PointFunction& objective, const BoxDomain& domain,
                            const OptResult& start, double radius, int sweeps = 3);

}  // namespace duelopt
