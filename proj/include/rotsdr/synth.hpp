#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rotsdr/rotmath.hpp"

namespace rotsdr {

enum class NoiseType { none, bounded, gaussian, truncated_gaussian };

struct NoiseModel {
  NoiseType type = NoiseType::none;
  double sigma = 0.0;  // gaussian / truncated_gaussian
  double delta = 0.0;  // bounded / truncated_gaussian

  static NoiseModel make_none() { return {}; }
  static NoiseModel make_gaussian(double sigma) { return {NoiseType::gaussian, sigma, 0.0}; }
  static NoiseModel make_bounded(double delta) { return {NoiseType::bounded, 0.0, delta}; }
  static NoiseModel make_truncated(double sigma, double delta) {
    return {NoiseType::truncated_gaussian, sigma, delta};
  }
};

enum class OutlierType { none, random_sphere, random_gaussian, clustered };

struct OutlierModel {
  OutlierType type = OutlierType::none;
  std::optional<UnitQuaternion> w_cl;  // clustered only
};

enum class XDistribution { gaussian_unit, uniform_sphere };

struct PointPair {
  Eigen::Vector3d y;
  Eigen::Vector3d x;
};

/// A synthetic problem with ground truth attached. Inliers come first
/// (indices 0..kstar-1), outliers after.
struct Instance {
  std::vector<PointPair> pairs;
  int ell = 0;
  std::vector<int> inlier_set;  // sorted, 0-based
  Rotation R_star = Rotation::identity();
  NoiseModel noise_model;
  OutlierModel outlier_model;
  uint64_t seed = 0;
  std::vector<Eigen::Vector3d> eps;  // per pair; zero on outliers

  int kstar() const { return static_cast<int>(inlier_set.size()); }
  bool is_inlier(int i) const;
  std::vector<DataMatrix> data_matrices() const;
};

struct GenConfig {
  int ell = 0;
  int kstar = 0;
  NoiseModel noise;
  XDistribution x_distribution = XDistribution::gaussian_unit;
  OutlierModel outliers;
  /// Clustered mode: target |w_cl^T w_star| when w_cl is not given explicitly.
  std::optional<double> cluster_dot;
  uint64_t seed = 0;
};

/// Inlier pairs y_i = R_star x_i + eps_i plus the drawn eps_i.
struct InlierDraw {
  std::vector<PointPair> pairs;
  std::vector<Eigen::Vector3d> eps;
};
InlierDraw gen_inliers(const GenConfig& config, const Rotation& r_star);

/// I.i.d. outlier pairs; uniform_sphere puts y and x on the unit sphere
/// (so lambda_min(Q_j) = 0), gaussian draws both from N(0, I3).
std::vector<PointPair> gen_random_outliers(int count, OutlierType distribution,
                                           uint64_t seed);

/// Pairs y_j = R_cl x_j, all consistent with the cluster rotation, so that
/// Q_j w_cl = 0. Throws std::invalid_argument if w_cl equals +/-w_star
/// (angle below 1e-6).
std::vector<PointPair> gen_clustered_outliers(int count, const UnitQuaternion& w_cl,
                                              const UnitQuaternion& w_star,
                                              XDistribution distribution, uint64_t seed);

/// Full instance: R_star drawn from the seed, inliers first, outliers after.
/// Deterministic: same config (including seed) gives a bit-identical instance.
Instance gen_instance(const GenConfig& config);

}  // namespace rotsdr
