#include "rotsdr/synth.hpp"

#include <doctest.h>
#include <stdexcept>

#include "rotsdr/io.hpp"
#include "rotsdr/rng.hpp"
#include "test_oracles.hpp"

using namespace rotsdr;
using rotsdr::testing::eigen_sym4_values;

TEST_CASE("noiseless inliers satisfy y = R* x exactly") {
  GenConfig cfg;
  cfg.ell = cfg.kstar = 20;
  cfg.seed = 3;
  const Instance inst = gen_instance(cfg);
  for (int i = 0; i < inst.ell; ++i)
    CHECK((inst.pairs[i].y - inst.R_star * inst.pairs[i].x).norm() == 0.0);
}

TEST_CASE("gaussian noise is recorded per pair") {
  GenConfig cfg;
  cfg.ell = cfg.kstar = 50;
  cfg.noise = NoiseModel::make_gaussian(0.01);
  cfg.seed = 5;
  const Instance inst = gen_instance(cfg);
  for (int i = 0; i < inst.ell; ++i) {
    CHECK((inst.pairs[i].y - inst.R_star * inst.pairs[i].x - inst.eps[i]).norm() < 1e-15);
    CHECK(inst.eps[i].norm() < 0.1);  // ~10 sigma
  }
}

TEST_CASE("bounded noise respects the radius") {
  GenConfig cfg;
  cfg.ell = cfg.kstar = 200;
  cfg.noise = NoiseModel::make_bounded(0.05);
  cfg.seed = 6;
  const Instance inst = gen_instance(cfg);
  for (const auto& e : inst.eps) CHECK(e.norm() <= 0.05);
}

TEST_CASE("truncated gaussian noise respects the radius") {
  GenConfig cfg;
  cfg.ell = cfg.kstar = 200;
  cfg.noise = NoiseModel::make_truncated(0.05, 0.08);
  cfg.seed = 61;
  const Instance inst = gen_instance(cfg);
  for (const auto& e : inst.eps) CHECK(e.norm() <= 0.08);
}

TEST_CASE("gaussian outliers have lambda_min > 0 across a large battery") {
  const auto outs = gen_random_outliers(10000, OutlierType::random_gaussian, 17);
  for (const auto& p : outs) {
    const double lmin = std::pow(p.y.norm() - p.x.norm(), 2);
    CHECK(lmin > 0.0);
  }
}

TEST_CASE("sphere outliers have lambda_min = 0") {
  const auto outs = gen_random_outliers(100, OutlierType::random_sphere, 18);
  for (const auto& p : outs) {
    CHECK(p.y.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const double lmin = eigen_sym4_values(build_Q(p.y, p.x))(0);
    CHECK(std::abs(lmin) < 1e-12);
  }
}

TEST_CASE("zero outlier count gives an empty list") {
  CHECK(gen_random_outliers(0, OutlierType::random_gaussian, 1).empty());
  const UnitQuaternion w_cl = UnitQuaternion::from(Eigen::Vector4d(0, 1, 0, 0));
  CHECK(gen_clustered_outliers(0, w_cl, UnitQuaternion::identity(),
                               XDistribution::uniform_sphere, 1)
            .empty());
}

TEST_CASE("clustered outliers annihilate w_cl") {
  CounterRng rng(19, 0);
  const UnitQuaternion w_star = rotsdr::testing::random_quaternion(rng);
  const Rotation r_star = quat_to_rot(w_star);
  const UnitQuaternion w_cl =
      rot_to_quat(Rotation{r_star.R * rotation_about(Eigen::Vector3d(1, 0, 0), M_PI).R});
  const auto outs =
      gen_clustered_outliers(50, w_cl, w_star, XDistribution::uniform_sphere, 19);
  for (const auto& p : outs) {
    CHECK((build_Q(p.y, p.x) * w_cl.w).norm() <= 1e-10);
    CHECK((p.y - quat_to_rot(w_cl) * p.x).norm() <= 1e-12);
  }
}

TEST_CASE("clustered generation rejects w_cl = +/- w_star") {
  const UnitQuaternion w = UnitQuaternion::identity();
  CHECK_THROWS_AS(
      gen_clustered_outliers(3, w, w, XDistribution::uniform_sphere, 1),
      std::invalid_argument);
}

TEST_CASE("gen_instance places inliers first and honors cluster_dot") {
  GenConfig cfg;
  cfg.ell = 12;
  cfg.kstar = 8;
  cfg.outliers.type = OutlierType::clustered;
  cfg.cluster_dot = 0.9;
  cfg.x_distribution = XDistribution::uniform_sphere;
  cfg.seed = 20;
  const Instance inst = gen_instance(cfg);
  CHECK(inst.kstar() == 8);
  for (int i = 0; i < 8; ++i) CHECK(inst.is_inlier(i));
  for (int j = 8; j < 12; ++j) CHECK(!inst.is_inlier(j));

  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  REQUIRE(inst.outlier_model.w_cl.has_value());
  CHECK(std::abs(inst.outlier_model.w_cl->w.dot(w_star.w)) ==
        doctest::Approx(0.9).epsilon(1e-9));

  // Condition for the clustered refutation with equal c: with ell - k* = 4
  // and k* = 8, the threshold is 1 - 4/16 = 0.75 < 0.9.
  const double threshold = 1.0 - 4.0 / 16.0;
  CHECK(std::abs(inst.outlier_model.w_cl->w.dot(w_star.w)) > threshold);
}

TEST_CASE("gen_instance validates counts") {
  GenConfig cfg;
  cfg.ell = 5;
  cfg.kstar = 9;
  CHECK_THROWS_AS(gen_instance(cfg), std::invalid_argument);
}

TEST_CASE("same seed reproduces a byte-identical serialized instance") {
  GenConfig cfg;
  cfg.ell = 30;
  cfg.kstar = 24;
  cfg.noise = NoiseModel::make_gaussian(0.02);
  cfg.outliers.type = OutlierType::random_gaussian;
  cfg.seed = 12345;
  const std::string a = instance_to_json(gen_instance(cfg)).dump(2);
  const std::string b = instance_to_json(gen_instance(cfg)).dump(2);
  CHECK(a == b);

  cfg.seed = 12346;
  const std::string c = instance_to_json(gen_instance(cfg)).dump(2);
  CHECK(a != c);
}

TEST_CASE("instance JSON round trip is lossless and byte-stable") {
  GenConfig cfg;
  cfg.ell = 15;
  cfg.kstar = 10;
  cfg.noise = NoiseModel::make_gaussian(0.01);
  cfg.outliers.type = OutlierType::random_sphere;
  cfg.seed = 99;
  const Instance inst = gen_instance(cfg);
  const std::string once = instance_to_json(inst).dump(2);
  const Instance reloaded = instance_from_json(json::parse(once));
  const std::string twice = instance_to_json(reloaded).dump(2);
  CHECK(once == twice);

  for (int i = 0; i < inst.ell; ++i) {
    CHECK((inst.pairs[i].y - reloaded.pairs[i].y).norm() == 0.0);
    CHECK((inst.pairs[i].x - reloaded.pairs[i].x).norm() == 0.0);
    CHECK((inst.eps[i] - reloaded.eps[i]).norm() < 1e-15);
  }
  CHECK(inst.inlier_set == reloaded.inlier_set);
}

TEST_CASE("gaussian x distribution matches the experiment setup statistics") {
  GenConfig cfg;
  cfg.ell = cfg.kstar = 2000;
  cfg.noise = NoiseModel::make_gaussian(0.01);
  cfg.seed = 7;
  const Instance inst = gen_instance(cfg);
  double sum_sq = 0.0;
  for (const auto& p : inst.pairs) sum_sq += p.x.squaredNorm();
  // E||x||^2 = 3 for N(0, I3); loose band.
  CHECK(sum_sq / cfg.ell == doctest::Approx(3.0).epsilon(0.1));
  double eps_sq = 0.0;
  for (const auto& e : inst.eps) eps_sq += e.squaredNorm();
  CHECK(eps_sq / cfg.ell == doctest::Approx(3.0 * 0.01 * 0.01).epsilon(0.15));
}
