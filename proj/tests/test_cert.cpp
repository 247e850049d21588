#include "rotsdr/cert.hpp"

#include <doctest.h>
#include <stdexcept>

#include "rotsdr/errors.hpp"
#include "rotsdr/experiments.hpp"
#include "rotsdr/io.hpp"
#include "rotsdr/rng.hpp"
#include "rotsdr/synth.hpp"
#include "test_oracles.hpp"

using namespace rotsdr;
using rotsdr::testing::eigen_sym4_values;

namespace {

Instance make_instance(int ell, int kstar, double sigma, uint64_t seed,
                       OutlierType out_type = OutlierType::random_gaussian) {
  GenConfig cfg;
  cfg.ell = ell;
  cfg.kstar = kstar;
  cfg.seed = seed;
  if (sigma > 0.0) cfg.noise = NoiseModel::make_gaussian(sigma);
  if (kstar < ell) cfg.outliers.type = out_type;
  return gen_instance(cfg);
}

std::vector<uint8_t> truth_of(const Instance& inst) {
  std::vector<uint8_t> t(inst.ell, 0);
  for (int i : inst.inlier_set) t[i] = 1;
  return t;
}

}  // namespace

TEST_CASE("clean certificate certifies a clean instance") {
  const Instance inst = make_instance(10, 10, 0.0, 1);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(10, 1.0);
  const Certificate cert = cert_clean(qs, c);
  CHECK(cert.mu_hat == doctest::Approx(-10.0));
  const TightnessReport rep = verify_kkt(cert, rot_to_quat(inst.R_star), qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);
  CHECK(rep.o1_residual <= 1e-10);
  CHECK(rep.o3_gap <= 1e-12);
}

TEST_CASE("single-pair instance is certified") {
  const Instance inst = make_instance(1, 1, 0.0, 2);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(1, 0.5);
  const TightnessReport rep =
      verify_kkt(cert_clean(qs, c), rot_to_quat(inst.R_star), qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);
}

TEST_CASE("dual slack quadratic form vanishes at z_i = w* on clean instances") {
  const Instance inst = make_instance(6, 6, 0.0, 3);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(6, 1.0);
  const Certificate cert = cert_clean(qs, c);
  const BigMatrix slack = assemble_dual_slack(qs, c, cert.mu_hat, cert.d_blocks);
  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(28);
  for (int i = 0; i <= 6; ++i) z.segment<4>(4 * i) = w_star.w;
  CHECK(std::abs(z.dot(slack.m * z)) <= 1e-10);
}

TEST_CASE("dual matrix structure: [D]_{ii} = -2 [D]_{0i}, symmetric, rest zero") {
  const Instance inst = make_instance(4, 4, 0.01, 4);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(4, 10.0);
  const Certificate cert = cert_noisy(qs, c, 4);
  const BigMatrix d = assemble_D(cert.d_blocks);
  CHECK((d.m - d.m.transpose()).norm() == 0.0);
  for (int i = 1; i <= 4; ++i) {
    CHECK((d.block(i, i) + 2.0 * d.block(0, i)).norm() == 0.0);
    for (int j = 1; j <= 4; ++j)
      if (i != j) CHECK(d.block(i, j).norm() == 0.0);
  }
  CHECK(d.block(0, 0).norm() == 0.0);
}

TEST_CASE("outlier certificate handles gaussian outliers with small c") {
  const Instance inst = make_instance(12, 10, 0.0, 5);
  const auto qs = inst.data_matrices();
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(12, 1.0);
  for (int j = 10; j < 12; ++j) c2(j) = 0.5 * eigen_sym4_values(qs[j])(0);
  const auto c = TruncationParams::from_vector(c2);
  const Certificate cert = cert_outliers_small_c(qs, c, 10);
  const TightnessReport rep =
      verify_kkt(cert, rot_to_quat(inst.R_star), qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);
}

TEST_CASE("outlier certificate survives 80% outliers") {
  const Instance inst = make_instance(50, 10, 0.0, 6);
  const auto qs = inst.data_matrices();
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(50, 1.0);
  for (int j = 10; j < 50; ++j) c2(j) = 0.5 * eigen_sym4_values(qs[j])(0);
  const auto c = TruncationParams::from_vector(c2);
  const TightnessReport rep = verify_kkt(cert_outliers_small_c(qs, c, 10),
                                         rot_to_quat(inst.R_star), qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);
}

TEST_CASE("outlier certificate with kstar = ell degenerates to the clean one") {
  const Instance inst = make_instance(5, 5, 0.0, 7);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(5, 1.0);
  const Certificate a = cert_outliers_small_c(qs, c, 5);
  const Certificate b = cert_clean(qs, c);
  CHECK(a.mu_hat == b.mu_hat);
  for (int i = 0; i < 5; ++i) CHECK((a.d_blocks[i] - b.d_blocks[i]).norm() == 0.0);
}

TEST_CASE("outlier certificate rejects oversized c naming the index") {
  const Instance inst = make_instance(6, 5, 0.0, 8);
  const auto qs = inst.data_matrices();
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(6, 1.0);
  c2(5) = 2.0 * eigen_sym4_values(qs[5])(3);
  CHECK_THROWS_WITH_AS(cert_outliers_small_c(qs, TruncationParams::from_vector(c2), 5),
                       doctest::Contains("pair 5"), regime_mismatch_error);
}

TEST_CASE("large-c refutation emits a valid witness") {
  const Instance inst = make_instance(8, 7, 0.0, 9);
  const auto qs = inst.data_matrices();
  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  const double quad = w_star.w.dot(qs[7] * w_star.w);
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(8, 1.0);
  c2(7) = 2.0 * quad;
  const auto c = TruncationParams::from_vector(c2);
  const auto wit = refute_large_c(qs, c, w_star, 7, 7);
  REQUIRE(wit.has_value());
  CHECK(wit->violation < 0.0);
  CHECK(wit->violation <= (quad - c2(7)) + 1e-9);

  // Direct re-evaluation of the quadratic form on the canonical family.
  std::vector<Eigen::Matrix4d> d_blocks;
  for (int i = 0; i < 7; ++i)
    d_blocks.push_back(0.5 * (qs[i] + c2(i) * Eigen::Matrix4d::Identity()));
  d_blocks.push_back(0.5 * (qs[7] - c2(7) * Eigen::Matrix4d::Identity()));
  const BigMatrix slack = assemble_dual_slack(qs, c, -c2.head(7).sum(), d_blocks);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(36);
  for (int i = 0; i <= 8; ++i) z.segment<4>(4 * i) = wit->z_blocks[i];
  CHECK(z.dot(slack.m * z) == doctest::Approx(wit->violation).epsilon(1e-12));
}

TEST_CASE("large-c refutation returns none below the threshold") {
  const Instance inst = make_instance(8, 7, 0.0, 10);
  const auto qs = inst.data_matrices();
  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  const double quad = w_star.w.dot(qs[7] * w_star.w);
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(8, 1.0);
  c2(7) = 0.5 * quad;
  CHECK(!refute_large_c(qs, TruncationParams::from_vector(c2), w_star, 7, 7).has_value());
}

TEST_CASE("clustered refutation: witness matches the closed form") {
  GenConfig cfg;
  cfg.ell = 12;
  cfg.kstar = 8;
  cfg.outliers.type = OutlierType::clustered;
  cfg.cluster_dot = 0.9;
  cfg.x_distribution = XDistribution::uniform_sphere;
  cfg.seed = 11;
  const Instance inst = gen_instance(cfg);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(12, 1.0);
  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  const UnitQuaternion w_cl = *inst.outlier_model.w_cl;

  const auto wit = refute_clustered(qs, c, w_star, w_cl, 8);
  REQUIRE(wit.has_value());
  const double dot = std::abs(w_cl.w.dot(w_star.w));
  const double closed_form = 2.0 * 8.0 * (1.0 - dot) - 4.0;
  CHECK(closed_form < 0.0);
  CHECK(std::abs(wit->violation - closed_form) <= 1e-9);
}

TEST_CASE("clustered refutation always fires when outliers outnumber 2x inliers") {
  GenConfig cfg;
  cfg.ell = 10;
  cfg.kstar = 3;  // ell - kstar = 7 > 2*kstar
  cfg.outliers.type = OutlierType::clustered;
  cfg.cluster_dot = 0.05;
  cfg.x_distribution = XDistribution::uniform_sphere;
  cfg.seed = 12;
  const Instance inst = gen_instance(cfg);
  const auto wit = refute_clustered(inst.data_matrices(), TruncationParams::uniform(10, 1.0),
                                    rot_to_quat(inst.R_star), *inst.outlier_model.w_cl, 3);
  REQUIRE(wit.has_value());
  CHECK(wit->violation < 0.0);
}

TEST_CASE("clustered refutation returns none when the condition reverses") {
  GenConfig cfg;
  cfg.ell = 12;
  cfg.kstar = 10;  // few outliers
  cfg.outliers.type = OutlierType::clustered;
  cfg.cluster_dot = 0.2;  // far from w*
  cfg.x_distribution = XDistribution::uniform_sphere;
  cfg.seed = 13;
  const Instance inst = gen_instance(cfg);
  CHECK(!refute_clustered(inst.data_matrices(), TruncationParams::uniform(12, 1.0),
                          rot_to_quat(inst.R_star), *inst.outlier_model.w_cl, 10)
             .has_value());
}

TEST_CASE("clustered refutation rejects non-clustered outliers") {
  const Instance inst = make_instance(8, 6, 0.0, 14);
  CHECK_THROWS_AS(refute_clustered(inst.data_matrices(), TruncationParams::uniform(8, 1.0),
                                   rot_to_quat(inst.R_star), UnitQuaternion::identity(), 6),
                  regime_mismatch_error);
}

TEST_CASE("eigengap: clean sum has zero lambda_min and infinite zeta") {
  const Instance inst = make_instance(10, 10, 0.0, 15);
  std::vector<int> all(10);
  for (int i = 0; i < 10; ++i) all[i] = i;
  const EigengapResult gap = eigengap(inst.data_matrices(), all);
  CHECK(std::abs(gap.lambda_min) <= 1e-10);
  CHECK(std::isinf(gap.zeta));
  CHECK(gap.eta == 0.0);
  CHECK(gap.lambda_min2 > 0.0);
}

TEST_CASE("eigengap of a noisy sum is finite and zeta = 1/eta") {
  const Instance inst = make_instance(50, 50, 0.05, 16);
  std::vector<int> all(50);
  for (int i = 0; i < 50; ++i) all[i] = i;
  const EigengapResult gap = eigengap(inst.data_matrices(), all);
  CHECK(gap.lambda_min > 0.0);
  CHECK(gap.zeta > 1.0);
  CHECK(gap.eta == doctest::Approx(1.0 / gap.zeta).epsilon(1e-12));
}

TEST_CASE("noisy condition degenerates in the noiseless limit") {
  const Instance inst = make_instance(10, 10, 0.0, 17);
  const auto qs = inst.data_matrices();
  const auto rep = check_noisy_condition(qs, TruncationParams::uniform(10, 1.0), 10);
  CHECK(rep.zeta_ok);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(rep.d(i)) <= 1e-9);
    CHECK(std::abs(rep.rhs(i)) <= 1e-6);
    CHECK(rep.margins(i) > 0.0);  // any positive c^2 works
  }
}

TEST_CASE("d_i matches an independent recomputation on a 2-pair instance") {
  const Instance inst = make_instance(2, 2, 0.05, 18);
  const auto qs = inst.data_matrices();
  const auto rep = check_noisy_condition(qs, TruncationParams::uniform(2, 10.0), 2);

  Eigen::Matrix4d sum = qs[0] + qs[1];
  const SymEig4 eig = jacobi_eig4(sum);
  const Eigen::Vector4d w = eig.vectors.col(0);
  const double q0 = w.dot(qs[0] * w), q1 = w.dot(qs[1] * w);
  const double zeta = eig.values(1) / eig.values(0);
  const double lmax0 = eigen_sym4_values(qs[0] - qs[1])(3);
  const double lmax1 = eigen_sym4_values(qs[1] - qs[0])(3);
  const double d0 = 0.5 * (q0 + q1) - q0 + lmax0 / zeta;
  const double d1 = 0.5 * (q0 + q1) - q1 + lmax1 / zeta;
  CHECK(rep.d(0) == doctest::Approx(d0).epsilon(1e-10));
  CHECK(rep.d(1) == doctest::Approx(d1).epsilon(1e-10));
}

TEST_CASE("noisy certificate certifies and satisfies the S-block identities") {
  const Instance inst = make_instance(20, 20, 0.01, 19);
  const auto qs = inst.data_matrices();
  const auto c = derive_truncation(inst, BatteryRegime::noisy, 1.0, 1.1, false);
  const Certificate cert = cert_noisy(qs, c, 20);
  const TightnessReport rep = verify_kkt(cert, cert.w_hat, qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);

  // Sum identity: sum S_i = sum (Q_i - w^T Q_i w I).
  Eigen::Matrix4d lhs = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d rhs = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 20; ++i) {
    lhs += cert.S_blocks[i];
    rhs += qs[i] - cert.w_hat.w.dot(qs[i] * cert.w_hat.w) * Eigen::Matrix4d::Identity();
  }
  CHECK((lhs - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm()));

  for (int i = 0; i < 20; ++i) {
    CHECK(eigen_sym4_values(cert.S_blocks[i])(0) >= -1e-10);
    const Eigen::Matrix4d slack =
        cert.S_blocks[i] + c.c_sq(i) * Eigen::Matrix4d::Identity() - qs[i];
    CHECK(eigen_sym4_values(slack)(0) > 0.0);
    CHECK((cert.S_blocks[i] * cert.w_hat.w).norm() <= 1e-9);
  }
}

TEST_CASE("noisy certificate with filtered outliers certifies") {
  const Instance inst = make_instance(24, 20, 0.01, 20);
  const auto qs = inst.data_matrices();
  const auto c = derive_truncation(inst, BatteryRegime::noisy_outliers, 1.0, 1.1, false);
  const Certificate cert = cert_noisy(qs, c, 20);
  CHECK(cert.regime == Regime::noisy_outliers);
  const TightnessReport rep = verify_kkt(cert, cert.w_hat, qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::certified_tight);
}

TEST_CASE("noisy certificate names the failing inequality") {
  const Instance inst = make_instance(10, 10, 0.05, 21);
  const auto qs = inst.data_matrices();
  CHECK_THROWS_WITH_AS(cert_noisy(qs, TruncationParams::uniform(10, 1e-8), 10),
                       doctest::Contains("truncation condition"), regime_mismatch_error);
}

TEST_CASE("corrupting mu by one flips the verdict via the O3 gap") {
  const Instance inst = make_instance(8, 8, 0.0, 22);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(8, 1.0);
  Certificate cert = cert_clean(qs, c);
  cert.mu_hat += 1.0;
  const TightnessReport rep =
      verify_kkt(cert, rot_to_quat(inst.R_star), qs, c, truth_of(inst));
  CHECK(rep.verdict == Verdict::inconclusive);
  CHECK(rep.o3_gap == doctest::Approx(1.0));
}

TEST_CASE("certified blocks are positive definite away from the spectrum edges") {
  // Under a certified verdict with c^2 distinct from lambda_min/lambda_max
  // of each Q_i, every [D]_{0i} must be PD.
  for (uint64_t seed : {31, 32, 33}) {
    const Instance inst = make_instance(10, 10, 0.0, seed);
    const auto qs = inst.data_matrices();
    const auto c = TruncationParams::uniform(10, 1.0);
    bool distinct = true;
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector4d vals = eigen_sym4_values(qs[i]);
      if (std::abs(vals(0) - 1.0) < 1e-9 || std::abs(vals(3) - 1.0) < 1e-9) distinct = false;
    }
    REQUIRE(distinct);
    const Certificate cert = cert_clean(qs, c);
    const TightnessReport rep =
        verify_kkt(cert, rot_to_quat(inst.R_star), qs, c, truth_of(inst));
    REQUIRE(rep.verdict == Verdict::certified_tight);
    for (const auto& blk : cert.d_blocks) CHECK(eigen_sym4_values(blk)(0) > 0.0);
  }
}

TEST_CASE("certificates serialize to JSON with blocks") {
  const Instance inst = make_instance(3, 3, 0.0, 23);
  const auto qs = inst.data_matrices();
  const auto c = TruncationParams::uniform(3, 1.0);
  const json j = certificate_to_json(cert_clean(qs, c), c);
  CHECK(j.at("regime") == "clean");
  CHECK(j.at("d_blocks_row_major").size() == 3);
  CHECK(j.at("d_blocks_row_major")[0].size() == 16);
  CHECK(j.at("mu_hat").get<double>() == doctest::Approx(-3.0));
}
