#pragma once

#include <Eigen/Core>
#include <vector>

#include "rotsdr/rotmath.hpp"

namespace rotsdr {

/// Per-pair truncation parameters c_i^2 (all entries > 0).
struct TruncationParams {
  Eigen::VectorXd c_sq;

  static TruncationParams uniform(int ell, double c2);
  static TruncationParams from_vector(Eigen::VectorXd values);

  int size() const { return static_cast<int>(c_sq.size()); }
  double sum() const { return c_sq.sum(); }
};

struct TlsSolution {
  UnitQuaternion w_hat = UnitQuaternion::identity();
  std::vector<uint8_t> theta;  // 1 = kept, 0 = rejected
  double value = 0.0;
  bool min_eig_multiplicity_flag = false;
  bool tie_flag = false;
  /// Classification route only: the theta implied by w_hat matches the
  /// given inlier set, and the eigengap of the restricted sum.
  bool consistent = true;
  double eigengap = 0.0;  // lambda_min2 / lambda_min; +inf when lambda_min = 0
};

/// Sum_i min{ w^T Q_i w, c_i^2 }.
double tls_objective(const UnitQuaternion& w, const std::vector<DataMatrix>& qs,
                     const TruncationParams& c);

/// Exact global minimum by enumerating all 2^ell keep/reject patterns;
/// the inner problem per pattern is a minimum-eigenvector computation.
/// Throws unsupported_size_error for ell > 16.
TlsSolution tls_bruteforce(const std::vector<DataMatrix>& qs, const TruncationParams& c);

/// Minimum eigenvector of the inlier-restricted sum, with a consistency
/// check of the implied classification against the given one. Consistency
/// failures are reported in-band via the `consistent` flag.
TlsSolution tls_by_classification(const std::vector<DataMatrix>& qs,
                                  const TruncationParams& c,
                                  const std::vector<int>& inlier_set);

}  // namespace rotsdr
