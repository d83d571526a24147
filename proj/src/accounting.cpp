#include "duelopt/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace duelopt {

namespace {

// Relative slack when comparing spend to budget, so that e.g. 1000 charges of
// 0.1 fit a budget of 100.
constexpr double kBudgetSlack = 1e-9;

}  // namespace

std::string_view to_string(QueryKind kind) {
  return kind == QueryKind::Label ? "label" : "comp";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::WarmStart: return "warm";
    case Phase::One: return "one";
    case Phase::Two: return "two";
  }
  return "?";
}

void CostModel::validate(bool allow_equal) const {
  if (!(comp_cost > 0.0)) throw std::invalid_argument("comparison cost must be positive");
  if (!(label_cost > 0.0)) throw std::invalid_argument("label cost must be positive");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  if (comp_cost > label_cost) {
    throw std::invalid_argument("comparison cost must not exceed label cost");
  }
  if (!allow_equal && comp_cost == label_cost) {
    throw std::invalid_argument("equal label and comparison costs need allow_equal_costs");
  }
}

QueryBounds n_bounds(const CostModel& model) {
  // Guard the rounding against representation error (100 / 0.1 = 1000.0000000000001).
  const double upper = model.budget / model.comp_cost;
  const double lower = model.budget / model.label_cost;
  QueryBounds b;
  b.n_upper = static_cast<long long>(std::ceil(upper * (1.0 - kBudgetSlack)));
  b.n_lower = static_cast<long long>(std::floor(lower * (1.0 + kBudgetSlack)));
  return b;
}

Ledger::Ledger(CostModel model) : model_(model) { model_.validate(true); }

double Ledger::spent() const {
  return static_cast<double>(labels_) * model_.label_cost +
         static_cast<double>(comparisons_) * model_.comp_cost;
}

bool Ledger::affordable(QueryKind kind) const {
  if (terminal_) return false;
  const double next = spent() + model_.cost(kind);
  return next <= model_.budget * (1.0 + kBudgetSlack);
}

bool Ledger::charge(QueryKind kind) {
  if (!affordable(kind)) {
    terminal_ = true;
    return false;
  }
  (kind == QueryKind::Label ? labels_ : comparisons_) += 1;
  return true;
}

bool charge(Ledger& ledger, const QueryDecision& decision) { return ledger.charge(decision.kind); }

double instantaneous_regret(const QueryDecision& decision, const DuelingOracle& oracle) {
  const double f_star = oracle.target_optimum().value;
  const double r = f_star - oracle.target(decision.x);
  if (decision.kind == QueryKind::Label) return r;
  if (!decision.x2) throw std::invalid_argument("comparison decision without opponent");
  return std::min(r, f_star - oracle.target(*decision.x2));
}

void RegretTrace::record(TraceEntry entry) {
  entry.t = static_cast<long long>(entries_.size()) + 1;
  entry.simple_regret =
      entries_.empty() ? entry.regret : std::min(entries_.back().simple_regret, entry.regret);
  entries_.push_back(std::move(entry));
}

double RegretTrace::simple_regret() const {
  return entries_.empty() ? std::numeric_limits<double>::infinity() : entries_.back().simple_regret;
}

}  // namespace duelopt
