#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rotsdr/rotmath.hpp"
#include "rotsdr/synth.hpp"

namespace rotsdr {

/// Both sides of the estimation-error bound
/// sin^2(tau) = 1 - (w_hat^T w*)^2 <= 4 sum ||eps_i|| ||x_i|| / lambda_min2(sum P_i),
/// with all sums over the given inlier subset.
struct ErrorBoundReport {
  double sin_sq_tau = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

ErrorBoundReport error_bound(const Instance& instance, const UnitQuaternion& w_hat,
                             const std::vector<int>& inlier_set);

/// lambda_min2(sum P_i) = 4 sum ||x_i||^2 - 4 lambda_max(sum x_i x_i^T),
/// computed without building any P_i.
double lambda_min2_closed_form(const std::vector<Eigen::Vector3d>& xs);

struct RatioRow {
  int trial = 0;
  int ell = 0;
  double sum_norm_sq = 0.0;
  double lambda_min2 = 0.0;
  double ratio = 0.0;
};

struct RatioStats {
  int ell = 0;
  int trials = 0;
  std::vector<RatioRow> rows;
  double fraction_in_band = 0.0;  // share of ratios inside [1/4, 3/4]
  double mean = 0.0;
};

/// Per-trial ratio sum ||x_i||^2 / lambda_min2(sum P_i) with x_i ~ N(0, I3).
RatioStats ratio_experiment(int ell, int trials, uint64_t seed);

}  // namespace rotsdr
