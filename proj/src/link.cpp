#include "duelopt/link.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace duelopt {

std::string_view to_string(LinkFamily family) {
  switch (family) {
    case LinkFamily::Logistic: return "Logistic";
    case LinkFamily::Probit: return "Probit";
    case LinkFamily::Linear: return "Linear";
  }
  return "?";
}

LinkFamily link_family_from_string(std::string_view name) {
  if (name == "Logistic") return LinkFamily::Logistic;
  if (name == "Probit") return LinkFamily::Probit;
  if (name == "Linear") return LinkFamily::Linear;
  throw std::invalid_argument("unknown link family '" + std::string(name) + "'");
}

double link_eval(const LinkFunction& link, double u) {
  const double v = u / link.temperature;
  switch (link.family) {
    case LinkFamily::Logistic: return 1.0 / (1.0 + std::exp(-v));
    case LinkFamily::Probit: return 0.5 * std::erfc(-v / std::numbers::sqrt2);
    case LinkFamily::Linear: return std::clamp(0.5 * (1.0 + v), 0.0, 1.0);
  }
  throw std::logic_error("link_eval: unknown family");
}

Eigen::ArrayXd link_eval(const LinkFunction& link, const Eigen::ArrayXd& u) {
  const Eigen::ArrayXd v = u / link.temperature;
  switch (link.family) {
    case LinkFamily::Logistic: return 1.0 / (1.0 + (-v).exp());
    case LinkFamily::Probit:
      return v.unaryExpr([](double a) { return 0.5 * std::erfc(-a / std::numbers::sqrt2); });
    case LinkFamily::Linear: return (0.5 * (1.0 + v)).max(0.0).min(1.0);
  }
  throw std::logic_error("link_eval: unknown family");
}

}  // namespace duelopt
