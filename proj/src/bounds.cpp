#include "rotsdr/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rotsdr/eig.hpp"
#include "rotsdr/rng.hpp"

namespace rotsdr {

ErrorBoundReport error_bound(const Instance& instance, const UnitQuaternion& w_hat,
                             const std::vector<int>& inlier_set) {
  if (instance.eps.size() != instance.pairs.size())
    throw std::invalid_argument("error_bound: instance carries no ground-truth noise");
  if (inlier_set.empty()) throw std::invalid_argument("error_bound: empty inlier set");

  const UnitQuaternion w_star = rot_to_quat(instance.R_star);

  double numer = 0.0;
  std::vector<Eigen::Vector3d> xs;
  xs.reserve(inlier_set.size());
  for (int i : inlier_set) {
    if (i < 0 || i >= static_cast<int>(instance.pairs.size()))
      throw std::invalid_argument("error_bound: inlier index out of range");
    numer += instance.eps[i].norm() * instance.pairs[i].x.norm();
    xs.push_back(instance.pairs[i].x);
  }

  ErrorBoundReport rep;
  const double dot = w_hat.w.dot(w_star.w);
  rep.sin_sq_tau = std::max(0.0, 1.0 - dot * dot);
  const double lmin2 = lambda_min2_closed_form(xs);
  rep.rhs = lmin2 > 0.0 ? 4.0 * numer / lmin2
                        : (numer > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.holds = rep.sin_sq_tau <= rep.rhs + 1e-10;
  return rep;
}

double lambda_min2_closed_form(const std::vector<Eigen::Vector3d>& xs) {
  if (xs.empty()) throw std::invalid_argument("lambda_min2_closed_form: empty input");
  double sum_sq = 0.0;
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& x : xs) {
    sum_sq += x.squaredNorm();
    scatter += x * x.transpose();
  }
  return 4.0 * sum_sq - 4.0 * sym3_lambda_max(scatter);
}

RatioStats ratio_experiment(int ell, int trials, uint64_t seed) {
  if (ell < 1 || trials < 1)
    throw std::invalid_argument("ratio_experiment: need ell >= 1 and trials >= 1");
  RatioStats stats;
  stats.ell = ell;
  stats.trials = trials;
  stats.rows.reserve(trials);

  int in_band = 0;
  double mean_acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(seed, 7000 + static_cast<uint64_t>(t));
    double sum_sq = 0.0;
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (int i = 0; i < ell; ++i) {
      const Eigen::Vector3d x = rng.gaussian3();
      sum_sq += x.squaredNorm();
      scatter += x * x.transpose();
    }
    const double lmin2 = 4.0 * sum_sq - 4.0 * sym3_lambda_max(scatter);
    RatioRow row;
    row.trial = t;
    row.ell = ell;
    row.sum_norm_sq = sum_sq;
    row.lambda_min2 = lmin2;
    row.ratio = lmin2 > 0.0 ? sum_sq / lmin2 : std::numeric_limits<double>::infinity();
    stats.rows.push_back(row);
    if (row.ratio >= 0.25 && row.ratio <= 0.75) ++in_band;
    mean_acc += row.ratio;
  }
  stats.fraction_in_band = double(in_band) / trials;
  stats.mean = mean_acc / trials;
  return stats;
}

}  // namespace rotsdr
