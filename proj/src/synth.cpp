#include "rotsdr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rotsdr/rng.hpp"

namespace rotsdr {

namespace {

// Stream ids: fixed offsets keep pair substreams disjoint from the
// instance-level draws.
constexpr uint64_t kStreamRStar = 1;
constexpr uint64_t kStreamCluster = 2;
constexpr uint64_t kStreamPairBase = 1000;

Eigen::Vector3d draw_x(CounterRng& rng, XDistribution dist) {
  return dist == XDistribution::gaussian_unit ? rng.gaussian3() : rng.uniform_sphere3();
}

Eigen::Vector3d draw_noise(CounterRng& rng, const NoiseModel& nm) {
  switch (nm.type) {
    case NoiseType::none:
      return Eigen::Vector3d::Zero();
    case NoiseType::gaussian:
      return nm.sigma * rng.gaussian3();
    case NoiseType::bounded: {
      // Uniform in the delta-ball: direction x radius with cube-root law.
      const Eigen::Vector3d dir = rng.uniform_sphere3();
      const double r = nm.delta * std::cbrt(rng.next_uniform());
      return r * dir;
    }
    case NoiseType::truncated_gaussian: {
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const Eigen::Vector3d e = nm.sigma * rng.gaussian3();
        if (e.norm() <= nm.delta) return e;
      }
      // Pathological sigma/delta ratio: fall back to the boundary.
      return nm.delta * rng.uniform_sphere3();
    }
  }
  return Eigen::Vector3d::Zero();
}

UnitQuaternion draw_quaternion(CounterRng& rng) {
  return UnitQuaternion::from_unnormalized(rng.gaussian4());
}

}  // namespace

bool Instance::is_inlier(int i) const {
  return std::binary_search(inlier_set.begin(), inlier_set.end(), i);
}

std::vector<DataMatrix> Instance::data_matrices() const {
  std::vector<DataMatrix> qs;
  qs.reserve(pairs.size());
  for (const auto& p : pairs) qs.push_back(build_Q(p.y, p.x));
  return qs;
}

InlierDraw gen_inliers(const GenConfig& config, const Rotation& r_star) {
  if (config.kstar < 0) throw std::invalid_argument("gen_inliers: kstar must be >= 0");
  InlierDraw out;
  out.pairs.reserve(config.kstar);
  out.eps.reserve(config.kstar);
  for (int i = 0; i < config.kstar; ++i) {
    CounterRng rng(config.seed, kStreamPairBase + static_cast<uint64_t>(i));
    const Eigen::Vector3d x = draw_x(rng, config.x_distribution);
    const Eigen::Vector3d e = draw_noise(rng, config.noise);
    out.pairs.push_back({r_star * x + e, x});
    out.eps.push_back(e);
  }
  return out;
}

std::vector<PointPair> gen_random_outliers(int count, OutlierType distribution,
                                           uint64_t seed) {
  if (count < 0) throw std::invalid_argument("gen_random_outliers: count must be >= 0");
  std::vector<PointPair> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    CounterRng rng(seed, kStreamPairBase + static_cast<uint64_t>(j));
    PointPair p;
    if (distribution == OutlierType::random_sphere) {
      p.y = rng.uniform_sphere3();
      p.x = rng.uniform_sphere3();
    } else {
      p.y = rng.gaussian3();
      p.x = rng.gaussian3();
    }
    out.push_back(p);
  }
  return out;
}

std::vector<PointPair> gen_clustered_outliers(int count, const UnitQuaternion& w_cl,
                                              const UnitQuaternion& w_star,
                                              XDistribution distribution, uint64_t seed) {
  if (count < 0) throw std::invalid_argument("gen_clustered_outliers: count must be >= 0");
  if (quat_angle(w_cl, w_star) <= 1e-6)
    throw std::invalid_argument("gen_clustered_outliers: w_cl coincides with +/-w_star");
  const Rotation r_cl = quat_to_rot(w_cl);
  std::vector<PointPair> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    CounterRng rng(seed, kStreamPairBase + static_cast<uint64_t>(j));
    const Eigen::Vector3d x = draw_x(rng, distribution);
    out.push_back({r_cl * x, x});
  }
  return out;
}

Instance gen_instance(const GenConfig& config) {
  if (config.ell < 1 || config.kstar < 0 || config.kstar > config.ell)
    throw std::invalid_argument("gen_instance: need 0 <= kstar <= ell, ell >= 1");
  const int n_out = config.ell - config.kstar;
  if (n_out > 0 && config.outliers.type == OutlierType::none)
    throw std::invalid_argument("gen_instance: kstar < ell requires an outlier model");

  Instance inst;
  inst.ell = config.ell;
  inst.seed = config.seed;
  inst.noise_model = config.noise;
  inst.outlier_model = config.outliers;

  CounterRng rot_rng(config.seed, kStreamRStar);
  const UnitQuaternion w_star = draw_quaternion(rot_rng);
  inst.R_star = quat_to_rot(w_star);

  InlierDraw in = gen_inliers(config, inst.R_star);
  inst.pairs = std::move(in.pairs);
  inst.eps = std::move(in.eps);
  for (int i = 0; i < config.kstar; ++i) inst.inlier_set.push_back(i);

  if (n_out > 0) {
    // Outlier pair substreams are offset by kstar so they do not collide
    // with the inlier substreams.
    const uint64_t outlier_seed =
        splitmix64(config.seed ^ 0xA5B35705F0E2C1D9ull) + static_cast<uint64_t>(config.kstar);
    std::vector<PointPair> outs;
    if (config.outliers.type == OutlierType::clustered) {
      UnitQuaternion w_cl = UnitQuaternion::identity();
      if (config.outliers.w_cl.has_value()) {
        w_cl = *config.outliers.w_cl;
      } else {
        // Compose R_star with a rotation whose half-angle cosine hits the
        // requested |w_cl^T w_star|.
        const double dot = config.cluster_dot.value_or(0.9);
        if (dot < 0.0 || dot >= 1.0)
          throw std::invalid_argument("gen_instance: cluster_dot must be in [0, 1)");
        CounterRng cl_rng(config.seed, kStreamCluster);
        const Eigen::Vector3d axis = cl_rng.uniform_sphere3();
        const double phi = 2.0 * std::acos(dot);
        w_cl = rot_to_quat(Rotation{inst.R_star.R * rotation_about(axis, phi).R});
      }
      inst.outlier_model.w_cl = w_cl;
      outs = gen_clustered_outliers(n_out, w_cl, w_star, config.x_distribution, outlier_seed);
    } else {
      outs = gen_random_outliers(n_out, config.outliers.type, outlier_seed);
    }
    for (auto& p : outs) {
      inst.pairs.push_back(p);
      inst.eps.push_back(Eigen::Vector3d::Zero());
    }
  }
  return inst;
}

}  // namespace rotsdr
