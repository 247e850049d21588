#include "rotsdr/rotmath.hpp"

#include <cmath>
#include <doctest.h>
#include <stdexcept>

#include "rotsdr/rng.hpp"
#include "test_oracles.hpp"

using namespace rotsdr;
using rotsdr::testing::eigen_sym4_values;
using rotsdr::testing::random_quaternion;
using rotsdr::testing::random_rotation;

TEST_CASE("quat_to_rot identity and axis cases") {
  const Rotation r = quat_to_rot(UnitQuaternion::identity());
  CHECK((r.R - Eigen::Matrix3d::Identity()).norm() < 1e-15);

  // [0;1;0;0] is a half-turn about e1.
  const Rotation rx = quat_to_rot(UnitQuaternion::from(Eigen::Vector4d(0, 1, 0, 0)));
  Eigen::Matrix3d expected = Eigen::Vector3d(1, -1, -1).asDiagonal();
  CHECK((rx.R - expected).norm() < 1e-15);
}

TEST_CASE("quat_to_rot rejects non-unit input") {
  CHECK_THROWS_AS(UnitQuaternion::from(Eigen::Vector4d(1, 1, 0, 0)), std::invalid_argument);
}

TEST_CASE("quat_to_rot produces orthogonal determinant-one matrices") {
  CounterRng rng(42, 0);
  for (int t = 0; t < 1000; ++t) {
    const Rotation r = quat_to_rot(random_quaternion(rng));
    CHECK((r.R.transpose() * r.R - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(std::abs(r.R.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("rot_to_quat inverts quat_to_rot") {
  CHECK((rot_to_quat(Rotation::identity()).w - Eigen::Vector4d(1, 0, 0, 0)).norm() < 1e-15);

  Eigen::Matrix3d half_turn = Eigen::Vector3d(1, -1, -1).asDiagonal();
  CHECK((rot_to_quat(Rotation::from(half_turn)).w - Eigen::Vector4d(0, 1, 0, 0)).norm() <
        1e-15);

  CounterRng rng(7, 0);
  for (int t = 0; t < 1000; ++t) {
    const Rotation r = random_rotation(rng);
    const Rotation back = quat_to_rot(rot_to_quat(r));
    CHECK((back.R - r.R).norm() < 1e-9);
  }
}

TEST_CASE("rot_to_quat rejects non-rotations") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = 1.5;
  CHECK_THROWS_AS(rot_to_quat(Rotation{m}), std::invalid_argument);
}

TEST_CASE("canonical sign makes the two-to-one map deterministic") {
  CounterRng rng(11, 0);
  for (int t = 0; t < 100; ++t) {
    const UnitQuaternion q = random_quaternion(rng);
    const UnitQuaternion flipped = UnitQuaternion::from(Eigen::Vector4d(-q.w));
    CHECK((q.w - flipped.w).norm() < 1e-15);
  }
}

TEST_CASE("build_Q equal-norm pair has spectrum {4,4,0,0}") {
  const Eigen::Vector3d e1(1, 0, 0);
  const Eigen::Vector4d vals = eigen_sym4_values(build_Q(e1, e1));
  CHECK(std::abs(vals(0)) < 1e-12);
  CHECK(std::abs(vals(1)) < 1e-12);
  CHECK(vals(2) == doctest::Approx(4.0));
  CHECK(vals(3) == doctest::Approx(4.0));
}

TEST_CASE("build_Q norms 2 and 1 give spectrum {9,9,1,1}") {
  const Eigen::Vector3d y(0, 2, 0), x(1, 0, 0);
  const Eigen::Vector4d vals = eigen_sym4_values(build_Q(y, x));
  CHECK(vals(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vals(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vals(2) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(vals(3) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("residual identity: w^T Q w equals the direct residual") {
  CounterRng rng(100, 0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector3d y = rng.gaussian3();
    const Eigen::Vector3d x = rng.gaussian3();
    const UnitQuaternion w = random_quaternion(rng);
    const double quad = w.w.dot(build_Q(y, x) * w.w);
    const double direct = (y - quat_to_rot(w) * x).squaredNorm();
    CHECK(quad == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("closed-form spectrum matches a dense eigensolve") {
  CounterRng rng(101, 0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector3d y = rng.gaussian3();
    const Eigen::Vector3d x = rng.gaussian3();
    const auto cf = q_spectrum_closed_form(y, x);  // descending
    const Eigen::Vector4d numeric = eigen_sym4_values(build_Q(y, x));  // ascending
    const double scale = std::max(1.0, cf[0]);
    CHECK(std::abs(cf[0] - numeric(3)) < 1e-9 * scale);
    CHECK(std::abs(cf[1] - numeric(2)) < 1e-9 * scale);
    CHECK(std::abs(cf[2] - numeric(1)) < 1e-9 * scale);
    CHECK(std::abs(cf[3] - numeric(0)) < 1e-9 * scale);
  }
}

TEST_CASE("zero pair has zero spectrum") {
  const auto cf = q_spectrum_closed_form(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
  for (double v : cf) CHECK(v == 0.0);
}

TEST_CASE("minimum of w^T Q w over the sphere is (||y|| - ||x||)^2") {
  CounterRng rng(102, 0);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d y = rng.gaussian3();
    const Eigen::Vector3d x = rng.gaussian3();
    const double lmin = eigen_sym4_values(build_Q(y, x))(0);
    const double expected = std::pow(y.norm() - x.norm(), 2);
    CHECK(lmin == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("in-house Jacobi matches the dense eigensolver oracle") {
  CounterRng rng(103, 0);
  for (int t = 0; t < 500; ++t) {
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = rng.next_gaussian();
    const Eigen::Matrix4d sym = 0.5 * (a + a.transpose());
    const Eigen::Vector4d ours = sym4_eigenvalues(sym);
    const Eigen::Vector4d oracle = eigen_sym4_values(sym);
    CHECK((ours - oracle).norm() < 1e-11 * std::max(1.0, sym.norm()));
    // Eigenvector residual check.
    const SymEig4 full = jacobi_eig4(sym);
    for (int k = 0; k < 4; ++k)
      CHECK((sym * full.vectors.col(k) - full.values(k) * full.vectors.col(k)).norm() <
            1e-11 * std::max(1.0, sym.norm()));
  }
}

TEST_CASE("decompose_inlier reconstructs Q and annihilates w*") {
  CounterRng rng(104, 0);
  for (int t = 0; t < 1000; ++t) {
    const Rotation r_star = random_rotation(rng);
    const Eigen::Vector3d x = rng.gaussian3();
    const Eigen::Vector3d eps = 0.05 * rng.gaussian3();
    const InlierDecomposition dec = decompose_inlier(x, r_star, eps);
    const Eigen::Vector3d y = r_star * x + eps;
    const Eigen::Matrix4d q = build_Q(y, x);
    const Eigen::Matrix4d recon =
        dec.P + dec.E + dec.eps_sq * Eigen::Matrix4d::Identity();
    CHECK((recon - q).norm() <= 1e-10 * std::max(1.0, q.norm()));

    const UnitQuaternion w_star = rot_to_quat(r_star);
    CHECK((dec.P * w_star.w).norm() < 1e-12 * std::max(1.0, dec.P.norm()));

    // Spectra: P has {4||x||^2 x2, 0 x2}; E has 2 eps^T R x +/- 2||eps|| ||x||.
    const Eigen::Vector4d pvals = eigen_sym4_values(dec.P);
    const double scale = std::max(1.0, 4.0 * x.squaredNorm());
    CHECK(std::abs(pvals(0)) < 1e-10 * scale);
    CHECK(std::abs(pvals(1)) < 1e-10 * scale);
    CHECK(pvals(2) == doctest::Approx(4.0 * x.squaredNorm()).epsilon(1e-9));
    CHECK(pvals(3) == doctest::Approx(4.0 * x.squaredNorm()).epsilon(1e-9));

    const Eigen::Vector4d evals = eigen_sym4_values(dec.E);
    const double mid = 2.0 * eps.dot(r_star * x);
    const double spread = 2.0 * eps.norm() * x.norm();
    CHECK(evals(0) == doctest::Approx(mid - spread).epsilon(1e-8).scale(1.0));
    CHECK(evals(1) == doctest::Approx(mid - spread).epsilon(1e-8).scale(1.0));
    CHECK(evals(2) == doctest::Approx(mid + spread).epsilon(1e-8).scale(1.0));
    CHECK(evals(3) == doctest::Approx(mid + spread).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("decompose_inlier noiseless case collapses to Q = P") {
  CounterRng rng(105, 0);
  const Rotation r_star = random_rotation(rng);
  const Eigen::Vector3d x = rng.gaussian3();
  const InlierDecomposition dec = decompose_inlier(x, r_star, Eigen::Vector3d::Zero());
  CHECK(dec.E.norm() == 0.0);
  CHECK(dec.eps_sq == 0.0);
  CHECK((dec.P - build_Q(r_star * x, x)).norm() == 0.0);
}

TEST_CASE("E quadratic form identity w^T E w = 2 eps^T (R* x - R x)") {
  CounterRng rng(106, 0);
  for (int t = 0; t < 200; ++t) {
    const Rotation r_star = random_rotation(rng);
    const Eigen::Vector3d x = rng.gaussian3();
    const Eigen::Vector3d eps = 0.1 * rng.gaussian3();
    const InlierDecomposition dec = decompose_inlier(x, r_star, eps);
    const UnitQuaternion w = random_quaternion(rng);
    const double lhs = w.w.dot(dec.E * w.w);
    const double rhs = 2.0 * eps.dot(r_star * x - quat_to_rot(w) * x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("quat_angle basic cases and trace oracle") {
  CounterRng rng(107, 0);
  const UnitQuaternion q = random_quaternion(rng);
  CHECK(quat_angle(q, q) == doctest::Approx(0.0).scale(1.0));

  // Orthogonal quaternions correspond to a half turn.
  const UnitQuaternion a = UnitQuaternion::from(Eigen::Vector4d(1, 0, 0, 0));
  const UnitQuaternion b = UnitQuaternion::from(Eigen::Vector4d(0, 0, 1, 0));
  CHECK(quat_angle(a, b) == doctest::Approx(M_PI));

  for (int t = 0; t < 500; ++t) {
    const UnitQuaternion w1 = random_quaternion(rng);
    const UnitQuaternion w2 = random_quaternion(rng);
    const Eigen::Matrix3d rel = quat_to_rot(w1).R.transpose() * quat_to_rot(w2).R;
    const double cosang = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    CHECK(quat_angle(w1, w2) == doctest::Approx(std::acos(cosang)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("composition identity: cos(phi_12/2) two ways") {
  CounterRng rng(108, 0);
  for (int t = 0; t < 1000; ++t) {
    const UnitQuaternion w1 = random_quaternion(rng);
    const UnitQuaternion w2 = random_quaternion(rng);
    const double via_dot = std::abs(w1.w.dot(w2.w));
    const double phi12 = quat_angle(w1, w2);
    CHECK(std::cos(phi12 / 2.0) == doctest::Approx(via_dot).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("axis-angle quaternion matches the Lemma 4.6 parameterization") {
  CounterRng rng(109, 0);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d axis = rng.uniform_sphere3();
    const double angle = rng.next_uniform() * 2.0 * M_PI;
    const UnitQuaternion q = axis_angle_to_quat(AxisAngle::from(axis, angle));
    Eigen::Vector4d expected;
    expected << std::cos(angle / 2.0), axis * std::sin(angle / 2.0);
    // Canonicalization may flip the sign.
    const double err = std::min((q.w - expected).norm(), (q.w + expected).norm());
    CHECK(err < 1e-12);
  }
}
