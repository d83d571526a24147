#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "duelopt/direct.hpp"

namespace duelopt {

enum class Fidelity { High, Low };
enum class Benchmark { CurrinExp, Borehole, Synthetic1D };

std::string_view to_string(Benchmark b);
Benchmark benchmark_from_string(std::string_view name);

struct BoreholeConstants {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double high_leading = 0.0;
  double high_additive = 0.0;
  double low_leading = 0.0;
  double low_additive = 0.0;
};

struct CurrinConstants {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double low_shift = 0.05;
};

struct Synthetic1DConstants {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double lengthscale = 0.1;
  std::vector<double> centers;
  std::vector<double> weights;
};

struct BenchmarkConstants {
  int version = 0;
  BoreholeConstants borehole;
  CurrinConstants currin;
  Synthetic1DConstants synthetic1d;
};

/// Parses the versioned constants file (data/benchmarks.json).
BenchmarkConstants load_benchmark_constants(const std::string& path);

/// Constants shipped with the repository, loaded once on first use.
const BenchmarkConstants& benchmark_constants();

/// Default location of the shipped constants file.
std::string default_data_dir();

BoxDomain benchmark_domain(Benchmark b);

/// Currin exponential on [0,1]^2. The low fidelity averages the high one at
/// (x1 +- 0.05, x2 + 0.05) and (x1 +- 0.05, max(0, x2 - 0.05)).
double eval_currin(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity);

/// Borehole water flow on the standard 8-d box, variables ordered
/// (r_w, r, T_u, H_u, T_l, H_l, L, K_w).
double eval_borehole(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity);

/// Fixed weighted sum of squared-exponential bumps on [0,1].
double eval_synthetic1d(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace duelopt
