#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace duelopt {

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Run-level random stream. The double conversion is fixed here rather than
/// left to <random> distributions so traces are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform point in the box spanned by `lower` and `upper`.
  Eigen::VectorXd uniform_point(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    Eigen::VectorXd x(lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(lower(i), upper(i));
    return x;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace duelopt
