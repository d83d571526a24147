#pragma once

#include <string_view>

#include <Eigen/Core>

namespace duelopt {

enum class LinkFamily { Logistic, Probit, Linear };

std::string_view to_string(LinkFamily family);
LinkFamily link_family_from_string(std::string_view name);

/// Map from a comparison-function gap to a win probability.
/// Logistic is the Bradley-Terry-Luce model, Probit the Thurstone model.
struct LinkFunction {
  LinkFamily family = LinkFamily::Logistic;
  double temperature = 1.0;

  bool operator==(const LinkFunction&) const = default;
};

double link_eval(const LinkFunction& link, double u);

/// Elementwise link over an array of gaps.
Eigen::ArrayXd link_eval(const LinkFunction& link, const Eigen::ArrayXd& u);

}  // namespace duelopt
