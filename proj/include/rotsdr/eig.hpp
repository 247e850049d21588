#pragma once

#include <Eigen/Core>

namespace rotsdr {

/// Eigendecomposition of a symmetric 4x4 matrix, eigenvalues ascending,
/// eigenvectors in the matching columns of `vectors`.
struct SymEig4 {
  Eigen::Vector4d values;
  Eigen::Matrix4d vectors;
};

/// Cyclic Jacobi rotation scheme for symmetric 4x4 matrices. Sweeps until
/// the off-diagonal Frobenius norm drops below 1e-13 * ||M||_F.
SymEig4 jacobi_eig4(const Eigen::Matrix4d& m);

/// Eigenvalues only, ascending.
Eigen::Vector4d sym4_eigenvalues(const Eigen::Matrix4d& m);

/// Largest eigenvalue of a symmetric 3x3 matrix via the trigonometric
/// solution of the characteristic cubic (no iteration).
double sym3_lambda_max(const Eigen::Matrix3d& m);

}  // namespace rotsdr
