#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "duelopt/oracle.hpp"

namespace duelopt {

enum class QueryKind { Comparison, Label };
enum class Phase { WarmStart, One, Two };

std::string_view to_string(QueryKind kind);
std::string_view to_string(Phase phase);

/// One query chosen by a policy. `x2` is the random opponent of a comparison.
struct QueryDecision {
  QueryKind kind = QueryKind::Label;
  Eigen::VectorXd x;
  std::optional<Eigen::VectorXd> x2;
  Phase phase = Phase::One;
};

struct CostModel {
  double label_cost = 1.0;
  double comp_cost = 0.1;
  double budget = 100.0;

  /// Requires 0 < comp_cost <= label_cost and budget > 0. Equal costs are
  /// rejected unless `allow_equal`.
  void validate(bool allow_equal = true) const;
  double cost(QueryKind kind) const { return kind == QueryKind::Label ? label_cost : comp_cost; }
  bool operator==(const CostModel&) const = default;
};

struct QueryBounds {
  long long n_lower = 0;  // floor(budget / label_cost)
  long long n_upper = 0;  // ceil(budget / comp_cost)
};

QueryBounds n_bounds(const CostModel& model);

/// Per-run budget. Charges accumulate exactly as counts times unit costs, so
/// the spent amount does not drift with the number of charges.
class Ledger {
 public:
  explicit Ledger(CostModel model);

  const CostModel& model() const { return model_; }
  double spent() const;
  double remaining() const { return model_.budget - spent(); }
  long long labels() const { return labels_; }
  long long comparisons() const { return comparisons_; }
  long long queries() const { return labels_ + comparisons_; }
  bool terminal() const { return terminal_; }
  void mark_terminal() { terminal_ = true; }

  /// True and debited if the remaining budget covers `kind`; otherwise the
  /// ledger turns terminal and nothing is debited.
  bool charge(QueryKind kind);

  /// Whether a charge of `kind` would be accepted now.
  bool affordable(QueryKind kind) const;

 private:
  CostModel model_;
  long long labels_ = 0;
  long long comparisons_ = 0;
  bool terminal_ = false;
};

bool charge(Ledger& ledger, const QueryDecision& decision);

/// Label: f* - f(x). Comparison: min(f* - f(x), f* - f(x2)).
double instantaneous_regret(const QueryDecision& decision, const DuelingOracle& oracle);

struct TraceEntry {
  long long t = 0;
  QueryKind kind = QueryKind::Label;
  Phase phase = Phase::One;
  Eigen::VectorXd x;
  std::optional<Eigen::VectorXd> x2;
  double outcome = 0.0;  // label value or comparison bit
  double cost = 0.0;
  double cumulative_cost = 0.0;
  double regret = 0.0;
  double simple_regret = 0.0;
};

class RegretTrace {
 public:
  /// Appends an entry; fills in t and the running simple regret.
  void record(TraceEntry entry);

  const std::vector<TraceEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  /// Simple regret of the whole trace; +inf when empty.
  double simple_regret() const;

 private:
  std::vector<TraceEntry> entries_;
};

}  // namespace duelopt
