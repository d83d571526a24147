#include "duelopt/direct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace duelopt {

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw std::invalid_argument("BoxDomain: bounds must be non-empty and of equal dimension");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_(i) < upper_(i))) throw std::invalid_argument("BoxDomain: need lower < upper");
  }
}

BoxDomain BoxDomain::unit(int dim) {
  return BoxDomain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

bool BoxDomain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower_.size()) return false;
  return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

Eigen::VectorXd BoxDomain::to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return ((x - lower_).array() / (upper_ - lower_).array()).matrix();
}

Eigen::VectorXd BoxDomain::from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  Eigen::VectorXd x = lower_ + (u.array() * (upper_ - lower_).array()).matrix();
  // Keep rounding from pushing points a hair outside the box.
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Eigen::MatrixXd BoxDomain::from_unit_cols(const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  Eigen::MatrixXd x(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < u.cols(); ++j) x.col(j) = from_unit(u.col(j));
  return x;
}

BatchFunction batched(PointFunction f) {
  return [f = std::move(f)](const Eigen::MatrixXd& pts) {
    Eigen::VectorXd out(pts.cols());
    for (Eigen::Index j = 0; j < pts.cols(); ++j) out(j) = f(pts.col(j));
    return out;
  };
}

namespace {

constexpr double kJonesEpsilon = 1e-4;
// Sides below 3^-30 (about 5e-15) cannot be split meaningfully in double.
constexpr int kMaxLevel = 30;

class RectangleSearch {
 public:
  RectangleSearch(const BatchFunction& objective, const BatchFunction* constraint,
                  const BoxDomain& domain, int max_evals)
      : objective_(objective), constraint_(constraint), domain_(domain), dim_(domain.dim()),
        max_evals_(std::max(1, max_evals)) {}

  OptResult run() {
    Eigen::VectorXd center = Eigen::VectorXd::Constant(dim_, 0.5);
    std::vector<Pending> first{{center, -1, -1, 0}};
    evaluate(first);
    add_rect(first[0].unit, std::vector<int>(dim_, 0), first[0].obj, first[0].cons);

    while (evals_ < max_evals_) {
      const std::vector<int> chosen = select();
      if (chosen.empty()) break;

      std::vector<Pending> batch;
      for (std::size_t c = 0; c < chosen.size(); ++c) {
        const int r = chosen[c];
        const int lmin = *std::min_element(levels(r), levels(r) + dim_);
        const double delta = std::pow(3.0, -(lmin + 1));
        for (int i = 0; i < dim_; ++i) {
          if (levels(r)[i] != lmin) continue;
          for (int sign : {+1, -1}) {
            Eigen::VectorXd u = center_of(r);
            u(i) += sign * delta;
            batch.push_back({u, static_cast<int>(c), i, sign});
          }
        }
      }
      const bool truncated = static_cast<int>(batch.size()) > max_evals_ - evals_;
      if (truncated) batch.resize(static_cast<std::size_t>(max_evals_ - evals_));
      evaluate(batch);
      if (truncated) break;
      divide(chosen, batch);
    }
    return result();
  }

 private:
  struct Pending {
    Eigen::VectorXd unit;
    int owner;  // index into the chosen list
    int dim;
    int sign;
    double obj = 0.0;
    double cons = 1.0;
  };

  struct Group {
    // (-objective, index): begin() is the best feasible rectangle.
    std::set<std::pair<double, int>> feasible;
    // (-constraint, index): begin() is the least violating rectangle.
    std::set<std::pair<double, int>> infeasible;
  };

  const int* levels(int r) const { return &levels_[static_cast<std::size_t>(r) * dim_]; }
  int* levels(int r) { return &levels_[static_cast<std::size_t>(r) * dim_]; }

  Eigen::VectorXd center_of(int r) const {
    return Eigen::Map<const Eigen::VectorXd>(&centers_[static_cast<std::size_t>(r) * dim_], dim_);
  }

  double diameter(int level_sum) const {
    const int l = level_sum / dim_;
    const int k = level_sum % dim_;
    const double sq = (dim_ - k) * std::pow(9.0, -l) + k * std::pow(9.0, -(l + 1));
    return 0.5 * std::sqrt(sq);
  }

  void evaluate(std::vector<Pending>& batch) {
    if (batch.empty()) return;
    Eigen::MatrixXd pts(dim_, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t j = 0; j < batch.size(); ++j) {
      pts.col(static_cast<Eigen::Index>(j)) = domain_.from_unit(batch[j].unit);
    }
    const Eigen::VectorXd obj = objective_(pts);
    Eigen::VectorXd cons;
    if (constraint_ != nullptr) cons = (*constraint_)(pts);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      batch[j].obj = obj(jj);
      batch[j].cons = constraint_ != nullptr ? cons(jj) : 1.0;
      record(pts.col(jj), batch[j].obj, batch[j].cons);
    }
    evals_ += static_cast<int>(batch.size());
  }

  void record(const Eigen::VectorXd& x, double obj, double cons) {
    if (!have_any_ || obj > best_any_value_) {
      have_any_ = true;
      best_any_value_ = obj;
      best_any_ = x;
    }
    if (cons >= 0.0) {
      if (!have_feasible_ || obj > best_feasible_value_) {
        have_feasible_ = true;
        best_feasible_value_ = obj;
        best_feasible_ = x;
      }
      feas_min_ = std::min(feas_min_, obj);
      feas_max_ = std::max(feas_max_, obj);
    }
  }

  int add_rect(const Eigen::VectorXd& unit, const std::vector<int>& lv, double obj, double cons) {
    const int idx = static_cast<int>(obj_.size());
    centers_.insert(centers_.end(), unit.data(), unit.data() + dim_);
    levels_.insert(levels_.end(), lv.begin(), lv.end());
    obj_.push_back(obj);
    cons_.push_back(cons);
    insert_into_group(idx);
    return idx;
  }

  int level_sum(int r) const { return std::accumulate(levels(r), levels(r) + dim_, 0); }

  void insert_into_group(int r) {
    Group& g = groups_[level_sum(r)];
    if (cons_[r] >= 0.0) {
      g.feasible.emplace(-obj_[r], r);
    } else {
      g.infeasible.emplace(-cons_[r], r);
    }
  }

  void erase_from_group(int r) {
    const auto it = groups_.find(level_sum(r));
    if (cons_[r] >= 0.0) {
      it->second.feasible.erase({-obj_[r], r});
    } else {
      it->second.infeasible.erase({-cons_[r], r});
    }
    if (it->second.feasible.empty() && it->second.infeasible.empty()) groups_.erase(it);
  }

  double penalty() const {
    const double range = feas_max_ - feas_min_;
    const double spread = range > 0.0 ? range : std::max(1.0, std::abs(feas_min_));
    return feas_min_ - 10.0 * spread;
  }

  // Minimization score of a single evaluated point under the current ranking.
  double score(double obj, double cons) const {
    if (cons >= 0.0) return -obj;
    if (have_feasible_) return -penalty();
    return -cons;
  }

  std::vector<int> select() const {
    struct Candidate {
      double diam;
      double score;
      int rect;
    };
    std::vector<Candidate> cands;
    for (auto it = groups_.rbegin(); it != groups_.rend(); ++it) {  // ascending diameter
      const Group& g = it->second;
      int rect;
      if (!g.feasible.empty()) {
        rect = g.feasible.begin()->second;
      } else {
        rect = g.infeasible.begin()->second;
      }
      if (*std::min_element(levels(rect), levels(rect) + dim_) >= kMaxLevel) continue;
      cands.push_back({diameter(it->first), score(obj_[rect], cons_[rect]), rect});
    }
    if (cands.empty()) return {};

    std::size_t start = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (cands[i].score <= cands[start].score) start = i;
    }
    const double fmin = cands[start].score;

    std::vector<std::size_t> hull;
    for (std::size_t i = start; i < cands.size(); ++i) {
      while (hull.size() >= 2) {
        const Candidate& a = cands[hull[hull.size() - 2]];
        const Candidate& b = cands[hull.back()];
        const Candidate& c = cands[i];
        const double cross =
            (b.diam - a.diam) * (c.score - a.score) - (b.score - a.score) * (c.diam - a.diam);
        if (cross <= 0.0) {
          hull.pop_back();
        } else {
          break;
        }
      }
      hull.push_back(i);
    }

    std::vector<int> chosen;
    for (std::size_t h = 0; h < hull.size(); ++h) {
      const Candidate& c = cands[hull[h]];
      if (h + 1 < hull.size()) {
        const Candidate& next = cands[hull[h + 1]];
        const double slope = (next.score - c.score) / (next.diam - c.diam);
        if (c.score - slope * c.diam > fmin - kJonesEpsilon * std::abs(fmin)) continue;
      }
      chosen.push_back(c.rect);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  void divide(const std::vector<int>& chosen, const std::vector<Pending>& batch) {
    std::size_t pos = 0;
    for (std::size_t c = 0; c < chosen.size(); ++c) {
      const int r = chosen[c];
      struct Split {
        int dim;
        double w;
        const Pending* plus;
        const Pending* minus;
      };
      std::vector<Split> splits;
      while (pos < batch.size() && batch[pos].owner == static_cast<int>(c)) {
        const Pending& p = batch[pos];
        const Pending& m = batch[pos + 1];
        splits.push_back({p.dim, std::min(score(p.obj, p.cons), score(m.obj, m.cons)), &p, &m});
        pos += 2;
      }
      std::stable_sort(splits.begin(), splits.end(),
                       [](const Split& a, const Split& b) { return a.w < b.w; });

      erase_from_group(r);
      for (const Split& s : splits) {
        levels(r)[s.dim] += 1;
        const std::vector<int> lv(levels(r), levels(r) + dim_);
        add_rect(s.plus->unit, lv, s.plus->obj, s.plus->cons);
        add_rect(s.minus->unit, lv, s.minus->obj, s.minus->cons);
      }
      insert_into_group(r);
    }
  }

  OptResult result() const {
    OptResult out;
    out.evals_used = evals_;
    if (have_feasible_) {
      out.argmax = best_feasible_;
      out.value = best_feasible_value_;
      out.feasible = true;
    } else {
      out.argmax = best_any_;
      out.value = best_any_value_;
      out.feasible = false;
    }
    return out;
  }

  const BatchFunction& objective_;
  const BatchFunction* constraint_;
  const BoxDomain& domain_;
  int dim_;
  int max_evals_;
  int evals_ = 0;

  std::vector<double> centers_;
  std::vector<int> levels_;
  std::vector<double> obj_;
  std::vector<double> cons_;
  std::map<int, Group> groups_;  // keyed by level sum; larger sum = smaller rectangle

  bool have_any_ = false;
  double best_any_value_ = 0.0;
  Eigen::VectorXd best_any_;
  bool have_feasible_ = false;
  double best_feasible_value_ = 0.0;
  Eigen::VectorXd best_feasible_;
  double feas_min_ = std::numeric_limits<double>::infinity();
  double feas_max_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

OptResult direct_maximize(const BatchFunction& objective, const BoxDomain& domain, int max_evals) {
  return RectangleSearch(objective, nullptr, domain, max_evals).run();
}

OptResult direct_maximize(const PointFunction& objective, const BoxDomain& domain, int max_evals) {
  return direct_maximize(batched(objective), domain, max_evals);
}

OptResult constrained_maximize(const BatchFunction& objective, const BatchFunction& constraint,
                               const BoxDomain& domain, int max_evals) {
  return RectangleSearch(objective, &constraint, domain, max_evals).run();
}

OptResult constrained_maximize(const PointFunction& objective, const PointFunction& constraint,
                               const BoxDomain& domain, int max_evals) {
  return constrained_maximize(batched(objective), batched(constraint), domain, max_evals);
}

OptResult coordinate_refine(const PointFunction& objective, const BoxDomain& domain,
                            const OptResult& start, double radius, int sweeps) {
  constexpr double kInvPhi = 0.6180339887498949;
  OptResult best = start;
  Eigen::VectorXd x = start.argmax;
  double fx = start.value;
  int evals = 0;

  auto probe = [&](int i, double t) {
    Eigen::VectorXd y = x;
    y(i) = t;
    ++evals;
    return objective(y);
  };

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int i = 0; i < domain.dim(); ++i) {
      const double half = radius * (domain.upper()(i) - domain.lower()(i));
      double a = std::max(domain.lower()(i), x(i) - half);
      double b = std::min(domain.upper()(i), x(i) + half);
      const double lo = a;
      const double hi = b;
      double c = b - kInvPhi * (b - a);
      double d = a + kInvPhi * (b - a);
      double fc = probe(i, c);
      double fd = probe(i, d);
      for (int it = 0; it < 80 && (b - a) > 1e-13 * (1.0 + std::abs(x(i))); ++it) {
        if (fc >= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - kInvPhi * (b - a);
          fc = probe(i, c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + kInvPhi * (b - a);
          fd = probe(i, d);
        }
      }
      const double candidates[] = {c, d, lo, hi};
      for (double t : candidates) {
        const double ft = probe(i, t);
        if (ft > fx) {
          fx = ft;
          x(i) = t;
        }
      }
    }
  }
  best.argmax = x;
  best.value = fx;
  best.evals_used = start.evals_used + evals;
  return best;
}

}  // namespace duelopt
