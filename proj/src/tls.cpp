#include "rotsdr/tls.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rotsdr/errors.hpp"

namespace rotsdr {

namespace {

constexpr double kTieRel = 1e-9;
constexpr double kMultiplicityRel = 1e-9;

bool is_tie(double quad, double c2) { return std::abs(quad - c2) <= kTieRel * c2; }

std::vector<uint8_t> theta_from_w(const UnitQuaternion& w, const std::vector<DataMatrix>& qs,
                                  const TruncationParams& c, bool* tie_out) {
  std::vector<uint8_t> theta(qs.size());
  bool tie = false;
  for (size_t i = 0; i < qs.size(); ++i) {
    const double quad = w.w.dot(qs[i] * w.w);
    theta[i] = quad < c.c_sq(static_cast<int>(i)) ? 1 : 0;
    tie = tie || is_tie(quad, c.c_sq(static_cast<int>(i)));
  }
  if (tie_out) *tie_out = tie;
  return theta;
}

}  // namespace

TruncationParams TruncationParams::uniform(int ell, double c2) {
  if (ell < 1 || c2 <= 0.0)
    throw std::invalid_argument("TruncationParams: need ell >= 1 and c^2 > 0");
  return {Eigen::VectorXd::Constant(ell, c2)};
}

TruncationParams TruncationParams::from_vector(Eigen::VectorXd values) {
  if (values.size() < 1 || (values.array() <= 0.0).any())
    throw std::invalid_argument("TruncationParams: all entries must be > 0");
  return {std::move(values)};
}

double tls_objective(const UnitQuaternion& w, const std::vector<DataMatrix>& qs,
                     const TruncationParams& c) {
  if (static_cast<int>(qs.size()) != c.size())
    throw std::invalid_argument("tls_objective: |Qs| != |c|");
  double total = 0.0;
  for (size_t i = 0; i < qs.size(); ++i)
    total += std::min(w.w.dot(qs[i] * w.w), c.c_sq(static_cast<int>(i)));
  return total;
}

TlsSolution tls_bruteforce(const std::vector<DataMatrix>& qs, const TruncationParams& c) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("tls_bruteforce: |Qs| != |c|");
  if (ell > 16) throw unsupported_size_error("tls_bruteforce: ell > 16");

  const double c_total = c.sum();
  double best_value = c_total;  // all-rejected pattern
  uint32_t best_mask = 0;
  UnitQuaternion best_w = UnitQuaternion::identity();
  double best_gap_lo = 0.0, best_gap_hi = 0.0;

  for (uint32_t mask = 1; mask < (1u << ell); ++mask) {
    Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
    double rejected = 0.0;
    for (int i = 0; i < ell; ++i) {
      if (mask & (1u << i))
        sum += qs[i];
      else
        rejected += c.c_sq(i);
    }
    const SymEig4 eig = jacobi_eig4(sum);
    const double value = eig.values(0) + rejected;
    // Ascending mask order makes strict improvement a lexicographic tiebreak.
    if (value < best_value) {
      best_value = value;
      best_mask = mask;
      best_w = UnitQuaternion::from_unnormalized(eig.vectors.col(0));
      best_gap_lo = eig.values(0);
      best_gap_hi = eig.values(1);
    }
  }

  TlsSolution sol;
  sol.w_hat = best_w;
  sol.theta = theta_from_w(best_w, qs, c, &sol.tie_flag);
  // Re-score through the objective so the reported value is consistent with
  // the theta implied by w_hat even on boundary patterns.
  sol.value = tls_objective(best_w, qs, c);
  sol.min_eig_multiplicity_flag =
      best_mask != 0 &&
      (best_gap_hi - best_gap_lo) <= kMultiplicityRel * std::max(1.0, std::abs(best_gap_hi));
  sol.consistent = true;
  sol.eigengap = best_gap_lo > 0.0 ? best_gap_hi / best_gap_lo
                                   : std::numeric_limits<double>::infinity();
  return sol;
}

TlsSolution tls_by_classification(const std::vector<DataMatrix>& qs,
                                  const TruncationParams& c,
                                  const std::vector<int>& inlier_set) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("tls_by_classification: |Qs| != |c|");
  if (inlier_set.empty())
    throw std::invalid_argument("tls_by_classification: inlier_set must be nonempty");

  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  for (int i : inlier_set) {
    if (i < 0 || i >= ell)
      throw std::invalid_argument("tls_by_classification: inlier index out of range");
    sum += qs[i];
  }
  const SymEig4 eig = jacobi_eig4(sum);

  TlsSolution sol;
  sol.w_hat = UnitQuaternion::from_unnormalized(eig.vectors.col(0));
  sol.eigengap = eig.values(0) > 0.0 ? eig.values(1) / eig.values(0)
                                     : std::numeric_limits<double>::infinity();
  sol.min_eig_multiplicity_flag =
      (eig.values(1) - eig.values(0)) <=
      kMultiplicityRel * std::max(1.0, std::abs(eig.values(1)));

  sol.theta = theta_from_w(sol.w_hat, qs, c, &sol.tie_flag);
  sol.consistent = true;
  std::vector<uint8_t> given(ell, 0);
  for (int i : inlier_set) given[i] = 1;
  for (int i = 0; i < ell; ++i)
    if (sol.theta[i] != given[i]) sol.consistent = false;

  sol.value = tls_objective(sol.w_hat, qs, c);
  return sol;
}

}  // namespace rotsdr
