#pragma once

#include <Eigen/Core>
#include <array>

#include "rotsdr/eig.hpp"

namespace rotsdr {

/// Unit quaternion w = [w1; w2; w3; w4], scalar first, ||w|| = 1.
/// The sign ambiguity (w and -w encode the same rotation) is resolved by
/// canonicalization: the first coordinate with |w_k| > 1e-12 is positive.
struct UnitQuaternion {
  Eigen::Vector4d w;

  /// Validates ||v|| = 1 within 1e-9, then canonicalizes the sign.
  /// Throws std::invalid_argument otherwise.
  static UnitQuaternion from(const Eigen::Vector4d& v);

  /// Normalizes v (must be nonzero), then canonicalizes the sign.
  static UnitQuaternion from_unnormalized(const Eigen::Vector4d& v);

  static UnitQuaternion identity();

  double dot(const UnitQuaternion& other) const { return w.dot(other.w); }
};

/// Element of SO(3): R^T R = I, det R = 1.
struct Rotation {
  Eigen::Matrix3d R;

  /// Validates orthogonality and determinant within 1e-9.
  /// Throws std::invalid_argument otherwise.
  static Rotation from(const Eigen::Matrix3d& m);

  static Rotation identity();

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return R * v; }
};

/// Unit axis + angle in [0, 2*pi].
struct AxisAngle {
  Eigen::Vector3d axis;
  double angle;

  static AxisAngle from(const Eigen::Vector3d& axis, double angle);
};

/// The 4x4 per-pair data matrix Q(y, x); symmetric PSD with spectrum
/// {(||y||+||x||)^2 x2, (||y||-||x||)^2 x2}.
using DataMatrix = Eigen::Matrix4d;

/// Split of an inlier's data matrix Q = P + E + ||eps||^2 * I into the pure
/// data part P (PSD, annihilates the ground-truth quaternion) and the noise
/// cross term E.
struct InlierDecomposition {
  Eigen::Matrix4d P;
  Eigen::Matrix4d E;
  double eps_sq;
};

/// Rotation matrix of a unit quaternion (entries quadratic in w).
Rotation quat_to_rot(const UnitQuaternion& w);

/// Inverse map, canonical-sign representative of the two-to-one fiber.
/// Throws std::invalid_argument if R is not in SO(3) within 1e-9.
UnitQuaternion rot_to_quat(const Rotation& r);

UnitQuaternion axis_angle_to_quat(const AxisAngle& aa);

/// Rotation about a unit axis by an angle (via the quaternion map).
Rotation rotation_about(const Eigen::Vector3d& axis, double angle);

/// U(y, x) = y1*X1 + y2*X2 + y3*X3 so that w^T U w = y^T R x.
Eigen::Matrix4d u_matrix(const Eigen::Vector3d& y, const Eigen::Vector3d& x);

/// Q(y, x) = (||y||^2 + ||x||^2) I - 2 U(y, x); for every unit quaternion w,
/// w^T Q w = ||y - R(w) x||^2.
DataMatrix build_Q(const Eigen::Vector3d& y, const Eigen::Vector3d& x);

/// Closed-form spectrum of build_Q(y, x), sorted descending:
/// {(||y||+||x||)^2, (||y||+||x||)^2, (||y||-||x||)^2, (||y||-||x||)^2}.
std::array<double, 4> q_spectrum_closed_form(const Eigen::Vector3d& y,
                                             const Eigen::Vector3d& x);

/// For an inlier pair y = R_star x + eps, returns P = Q(R_star x, x),
/// E = 2 (eps^T R_star x) I - 2 U(eps, x), and ||eps||^2.
InlierDecomposition decompose_inlier(const Eigen::Vector3d& x, const Rotation& r_star,
                                     const Eigen::Vector3d& eps);

/// Angle phi_12 in [0, pi] of R(w1)^T R(w2); equals 2*acos(|w1^T w2|).
double quat_angle(const UnitQuaternion& w1, const UnitQuaternion& w2);

}  // namespace rotsdr
