#include "rotsdr/rotmath.hpp"
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace rotsdr {

namespace {

void canonicalize_sign(Eigen::Vector4d& w) {
  for (int k = 0; k < 4; ++k) {
    if (std::abs(w(k)) > 1e-12) {
      if (w(k) < 0.0) w = -w;
      return;
    }
  }
}

}  // namespace

UnitQuaternion UnitQuaternion::from(const Eigen::Vector4d& v) {
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("UnitQuaternion: input norm deviates from 1 by more than 1e-9");
  Eigen::Vector4d w = v.normalized();
  canonicalize_sign(w);
  return UnitQuaternion{w};
}

UnitQuaternion UnitQuaternion::from_unnormalized(const Eigen::Vector4d& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("UnitQuaternion: cannot normalize zero vector");
  Eigen::Vector4d w = v / n;
  canonicalize_sign(w);
  return UnitQuaternion{w};
}

UnitQuaternion UnitQuaternion::identity() {
  return UnitQuaternion{Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)};
}

Rotation Rotation::from(const Eigen::Matrix3d& m) {
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-9 || std::abs(m.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("Rotation: input is not in SO(3) within 1e-9");
  return Rotation{m};
}

Rotation Rotation::identity() { return Rotation{Eigen::Matrix3d::Identity()}; }

AxisAngle AxisAngle::from(const Eigen::Vector3d& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("AxisAngle: axis must be unit length");
  return AxisAngle{axis, angle};
}

Rotation quat_to_rot(const UnitQuaternion& q) {
  const double w1 = q.w(0), w2 = q.w(1), w3 = q.w(2), w4 = q.w(3);
  Eigen::Matrix3d r;
  r << w1 * w1 + w2 * w2 - w3 * w3 - w4 * w4, 2.0 * (w2 * w3 - w1 * w4),
      2.0 * (w2 * w4 + w1 * w3),
      2.0 * (w2 * w3 + w1 * w4), w1 * w1 + w3 * w3 - w2 * w2 - w4 * w4,
      2.0 * (w3 * w4 - w1 * w2),
      2.0 * (w2 * w4 - w1 * w3), 2.0 * (w3 * w4 + w1 * w2),
      w1 * w1 + w4 * w4 - w2 * w2 - w3 * w3;
  return Rotation{r};
}

UnitQuaternion rot_to_quat(const Rotation& rot) {
  const Eigen::Matrix3d& r = rot.R;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-9 || std::abs(r.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("rot_to_quat: input is not in SO(3) within 1e-9");

  // Shepperd's branch selection: pick the largest of the four squared
  // components to avoid cancellation.
  const double tr = r.trace();
  Eigen::Vector4d w;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = std::sqrt(1.0 + tr) * 2.0;  // s = 4*w1
    w(0) = 0.25 * s;
    w(1) = (r(2, 1) - r(1, 2)) / s;
    w(2) = (r(0, 2) - r(2, 0)) / s;
    w(3) = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;  // 4*w2
    w(0) = (r(2, 1) - r(1, 2)) / s;
    w(1) = 0.25 * s;
    w(2) = (r(0, 1) + r(1, 0)) / s;
    w(3) = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;  // 4*w3
    w(0) = (r(0, 2) - r(2, 0)) / s;
    w(1) = (r(0, 1) + r(1, 0)) / s;
    w(2) = 0.25 * s;
    w(3) = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;  // 4*w4
    w(0) = (r(1, 0) - r(0, 1)) / s;
    w(1) = (r(0, 2) + r(2, 0)) / s;
    w(2) = (r(1, 2) + r(2, 1)) / s;
    w(3) = 0.25 * s;
  }
  return UnitQuaternion::from_unnormalized(w);
}

UnitQuaternion axis_angle_to_quat(const AxisAngle& aa) {
  Eigen::Vector4d w;
  w(0) = std::cos(aa.angle / 2.0);
  w.tail<3>() = aa.axis * std::sin(aa.angle / 2.0);
  return UnitQuaternion::from_unnormalized(w);
}

Rotation rotation_about(const Eigen::Vector3d& axis, double angle) {
  return quat_to_rot(axis_angle_to_quat(AxisAngle::from(axis, angle)));
}

Eigen::Matrix4d u_matrix(const Eigen::Vector3d& y, const Eigen::Vector3d& x) {
  const double x1 = x(0), x2 = x(1), x3 = x(2);
  Eigen::Matrix4d xm1, xm2, xm3;
  xm1 << x1, 0, x3, -x2,
      0, x1, x2, x3,
      x3, x2, -x1, 0,
      -x2, x3, 0, -x1;
  xm2 << x2, -x3, 0, x1,
      -x3, -x2, x1, 0,
      0, x1, x2, x3,
      x1, 0, x3, -x2;
  xm3 << x3, x2, -x1, 0,
      x2, -x3, 0, x1,
      -x1, 0, -x3, x2,
      0, x1, x2, x3;
  return y(0) * xm1 + y(1) * xm2 + y(2) * xm3;
}

DataMatrix build_Q(const Eigen::Vector3d& y, const Eigen::Vector3d& x) {
  return (y.squaredNorm() + x.squaredNorm()) * Eigen::Matrix4d::Identity() -
         2.0 * u_matrix(y, x);
}

std::array<double, 4> q_spectrum_closed_form(const Eigen::Vector3d& y,
                                             const Eigen::Vector3d& x) {
  const double ny = y.norm(), nx = x.norm();
  const double hi = (ny + nx) * (ny + nx);
  const double lo = (ny - nx) * (ny - nx);
  return {hi, hi, lo, lo};
}

InlierDecomposition decompose_inlier(const Eigen::Vector3d& x, const Rotation& r_star,
                                     const Eigen::Vector3d& eps) {
  const Eigen::Vector3d rx = r_star * x;
  InlierDecomposition out;
  out.P = build_Q(rx, x);
  out.E = 2.0 * eps.dot(rx) * Eigen::Matrix4d::Identity() - 2.0 * u_matrix(eps, x);
  out.eps_sq = eps.squaredNorm();
  return out;
}

double quat_angle(const UnitQuaternion& w1, const UnitQuaternion& w2) {
  if (std::abs(w1.w.norm() - 1.0) > 1e-9 || std::abs(w2.w.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("quat_angle: inputs must be unit quaternions");
  const double d = std::clamp(std::abs(w1.w.dot(w2.w)), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

}  // namespace rotsdr
