#include "rotsdr/cert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rotsdr/errors.hpp"

namespace rotsdr {

namespace {

constexpr double kZetaZeroRel = 1e-13;

Eigen::Matrix4d inlier_block(const DataMatrix& q, double c2) {
  return 0.5 * (q + c2 * Eigen::Matrix4d::Identity());
}

Eigen::Matrix4d outlier_block(const DataMatrix& q, double c2) {
  return 0.5 * (q - c2 * Eigen::Matrix4d::Identity());
}

/// Orthonormal [V0, w]: V0 spans the complement of w, built from a
/// Householder reflection that carries e4 onto +/-w.
Eigen::Matrix4d complete_basis(const Eigen::Vector4d& w) {
  const Eigen::Vector4d e4 = Eigen::Vector4d::Unit(3);
  // Reflect towards whichever of +/-w is farther from e4 for stability.
  const Eigen::Vector4d u = w(3) <= 0.0 ? (e4 - w).eval() : (e4 + w).eval();
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  const double uu = u.squaredNorm();
  if (uu > 1e-24) h -= (2.0 / uu) * (u * u.transpose());
  Eigen::Matrix4d v = h;
  v.col(3) = w;  // h.col(3) is +/-w; pin the sign
  return v;
}

}  // namespace

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::clean: return "clean";
    case Regime::outliers_small_c: return "outliers_small_c";
    case Regime::noisy: return "noisy";
    case Regime::noisy_outliers: return "noisy_outliers";
  }
  return "unknown";
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::certified_tight: return "certified_tight";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Certificate cert_clean(const std::vector<DataMatrix>& qs, const TruncationParams& c) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("cert_clean: |Qs| != |c|");
  Certificate cert;
  cert.regime = Regime::clean;
  cert.mu_hat = -c.sum();
  cert.d_blocks.reserve(ell);
  for (int i = 0; i < ell; ++i) cert.d_blocks.push_back(inlier_block(qs[i], c.c_sq(i)));
  return cert;
}

Certificate cert_outliers_small_c(const std::vector<DataMatrix>& qs,
                                  const TruncationParams& c, int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("cert_outliers_small_c: |Qs| != |c|");
  if (kstar < 0 || kstar > ell)
    throw std::invalid_argument("cert_outliers_small_c: kstar out of range");

  for (int j = kstar; j < ell; ++j) {
    const double lmin = sym4_eigenvalues(qs[j])(0);
    if (!(c.c_sq(j) < lmin))
      throw regime_mismatch_error("cert_outliers_small_c: pair " + std::to_string(j) +
                                  " has c^2 >= lambda_min(Q)");
  }

  Certificate cert;
  cert.regime = Regime::outliers_small_c;
  cert.mu_hat = -c.c_sq.head(kstar).sum();
  cert.d_blocks.reserve(ell);
  for (int i = 0; i < kstar; ++i) cert.d_blocks.push_back(inlier_block(qs[i], c.c_sq(i)));
  for (int j = kstar; j < ell; ++j) cert.d_blocks.push_back(outlier_block(qs[j], c.c_sq(j)));
  return cert;
}

BigMatrix assemble_dual_slack(const std::vector<DataMatrix>& qs, const TruncationParams& c,
                              double mu_hat, const std::vector<Eigen::Matrix4d>& d_blocks) {
  const BigMatrix q = assemble_bigQ(qs, c);
  const BigMatrix b = assemble_B(static_cast<int>(qs.size()));
  const BigMatrix d = assemble_D(d_blocks);
  return BigMatrix(Eigen::MatrixXd(q.m - mu_hat * b.m - d.m));
}

std::optional<RefutationWitness> refute_large_c(const std::vector<DataMatrix>& qs,
                                                const TruncationParams& c,
                                                const UnitQuaternion& w_star, int j,
                                                int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (j < kstar || j >= ell)
    throw std::invalid_argument("refute_large_c: j must index an outlier");

  const double quad = w_star.w.dot(qs[j] * w_star.w);
  if (!(c.c_sq(j) > quad)) return std::nullopt;

  // Stationarity + exactness force w*^T [D]_{0j} w* = (w*^T Q_j w* - c_j^2)/2
  // < 0, so the consistent block has a negative eigendirection. The
  // canonical family member is (Q_j - c_j^2 I)/2.
  const Eigen::Matrix4d block = outlier_block(qs[j], c.c_sq(j));
  const SymEig4 eig = jacobi_eig4(block);

  RefutationWitness wit;
  wit.z_blocks.assign(ell + 1, Eigen::Vector4d::Zero());
  wit.z_blocks[j + 1] = eig.vectors.col(0);

  std::vector<Eigen::Matrix4d> d_blocks;
  d_blocks.reserve(ell);
  for (int i = 0; i < kstar; ++i) d_blocks.push_back(inlier_block(qs[i], c.c_sq(i)));
  for (int k = kstar; k < ell; ++k) d_blocks.push_back(outlier_block(qs[k], c.c_sq(k)));
  const double mu_hat = -c.c_sq.head(kstar).sum();
  const BigMatrix slack = assemble_dual_slack(qs, c, mu_hat, d_blocks);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(4 * (ell + 1));
  for (int i = 0; i <= ell; ++i) z.segment<4>(4 * i) = wit.z_blocks[i];
  wit.violation = z.dot(slack.m * z);
  return wit;
}

std::optional<RefutationWitness> refute_clustered(const std::vector<DataMatrix>& qs,
                                                  const TruncationParams& c,
                                                  const UnitQuaternion& w_star,
                                                  const UnitQuaternion& w_cl, int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (kstar < 1 || kstar >= ell)
    throw std::invalid_argument("refute_clustered: need 1 <= kstar < ell");

  for (int j = kstar; j < ell; ++j) {
    const double res = (qs[j] * w_cl.w).norm();
    if (res > 1e-8 * (1.0 + qs[j].norm()))
      throw regime_mismatch_error("refute_clustered: pair " + std::to_string(j) +
                                  " violates the cluster identity Q w_cl = 0");
  }

  const double sum_in = c.c_sq.head(kstar).sum();
  const double sum_out = c.c_sq.tail(ell - kstar).sum();
  const double dot = w_cl.w.dot(w_star.w);
  if (!(1.0 - sum_out / (2.0 * sum_in) < std::abs(dot))) return std::nullopt;

  // Align the cluster quaternion with w* so the cross term carries |dot|.
  const Eigen::Vector4d z_cl = dot >= 0.0 ? w_cl.w : Eigen::Vector4d(-w_cl.w);

  RefutationWitness wit;
  wit.z_blocks.assign(ell + 1, Eigen::Vector4d::Zero());
  wit.z_blocks[0] = z_cl;
  for (int i = 0; i < kstar; ++i) wit.z_blocks[i + 1] = w_star.w;
  for (int j = kstar; j < ell; ++j) wit.z_blocks[j + 1] = z_cl;

  std::vector<Eigen::Matrix4d> d_blocks;
  d_blocks.reserve(ell);
  for (int i = 0; i < kstar; ++i) d_blocks.push_back(inlier_block(qs[i], c.c_sq(i)));
  for (int j = kstar; j < ell; ++j) d_blocks.push_back(outlier_block(qs[j], c.c_sq(j)));
  const double mu_hat = -sum_in;
  const BigMatrix slack = assemble_dual_slack(qs, c, mu_hat, d_blocks);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(4 * (ell + 1));
  for (int i = 0; i <= ell; ++i) z.segment<4>(4 * i) = wit.z_blocks[i];
  wit.violation = z.dot(slack.m * z);
  return wit;
}

EigengapResult eigengap(const std::vector<DataMatrix>& qs, const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("eigengap: subset must be nonempty");
  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(qs.size()))
      throw std::invalid_argument("eigengap: index out of range");
    sum += qs[i];
  }
  const Eigen::Vector4d vals = sym4_eigenvalues(sum);
  EigengapResult out;
  out.lambda_min = vals(0);
  out.lambda_min2 = vals(1);
  const double lmin_clamped = std::max(vals(0), 0.0);
  if (lmin_clamped <= kZetaZeroRel * std::max(vals(1), 0.0) || vals(1) <= 0.0) {
    out.zeta = std::numeric_limits<double>::infinity();
    out.eta = 0.0;
  } else {
    out.zeta = vals(1) / lmin_clamped;
    out.eta = lmin_clamped / vals(1);
  }
  return out;
}

NoisyConditionReport check_noisy_condition(const std::vector<DataMatrix>& qs,
                                           const TruncationParams& c, int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (kstar < 2 || kstar > ell)
    throw std::invalid_argument("check_noisy_condition: need 2 <= kstar <= ell");

  std::vector<int> subset(kstar);
  for (int i = 0; i < kstar; ++i) subset[i] = i;

  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  for (int i = 0; i < kstar; ++i) sum += qs[i];
  const SymEig4 eig = jacobi_eig4(sum);

  NoisyConditionReport rep;
  rep.w_hat = UnitQuaternion::from_unnormalized(eig.vectors.col(0));
  rep.gap = eigengap(qs, subset);
  rep.zeta_ok = rep.gap.zeta >= double(kstar) / double(kstar - 1);

  const Eigen::Vector4d& w = rep.w_hat.w;
  Eigen::VectorXd quad(kstar);
  for (int i = 0; i < kstar; ++i) quad(i) = w.dot(qs[i] * w);
  const double quad_mean = quad.mean();

  rep.d.resize(kstar);
  rep.rhs.resize(kstar);
  rep.margins.resize(kstar);
  for (int i = 0; i < kstar; ++i) {
    // sum_{j != i} (Q_i - Q_j) over the inlier set = kstar*Q_i - sum.
    const Eigen::Matrix4d diff = double(kstar) * qs[i] - sum;
    const double lmax = sym4_eigenvalues(diff)(3);
    // eta = 1/zeta absorbs the noiseless limit (zeta = inf -> term 0).
    rep.d(i) = quad_mean - quad(i) + rep.gap.eta * lmax / double(kstar - 1);
    rep.rhs(i) = quad(i) + (qs[i] * w).norm() + 0.5 * (std::abs(rep.d(i)) + rep.d(i));
    rep.margins(i) = c.c_sq(i) - rep.rhs(i);
  }
  return rep;
}

Certificate cert_noisy(const std::vector<DataMatrix>& qs, const TruncationParams& c,
                       int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("cert_noisy: |Qs| != |c|");

  const NoisyConditionReport rep = check_noisy_condition(qs, c, kstar);
  if (!rep.zeta_ok)
    throw regime_mismatch_error("cert_noisy: eigengap condition zeta >= k/(k-1) fails (zeta=" +
                                std::to_string(rep.gap.zeta) + ")");
  for (int i = 0; i < kstar; ++i) {
    if (!(rep.margins(i) > 0.0))
      throw regime_mismatch_error("cert_noisy: truncation condition fails at inlier " +
                                  std::to_string(i) + " (c^2=" + std::to_string(c.c_sq(i)) +
                                  " <= rhs=" + std::to_string(rep.rhs(i)) + ")");
  }
  for (int j = kstar; j < ell; ++j) {
    const double lmin = sym4_eigenvalues(qs[j])(0);
    if (!(c.c_sq(j) < lmin))
      throw regime_mismatch_error("cert_noisy: outlier " + std::to_string(j) +
                                  " has c^2 >= lambda_min(Q)");
  }
  return cert_noisy_unchecked(qs, c, kstar);
}

Certificate cert_noisy_unchecked(const std::vector<DataMatrix>& qs,
                                 const TruncationParams& c, int kstar) {
  const int ell = static_cast<int>(qs.size());
  if (ell != c.size()) throw std::invalid_argument("cert_noisy: |Qs| != |c|");
  const NoisyConditionReport rep = check_noisy_condition(qs, c, kstar);

  Certificate cert;
  cert.regime = kstar == ell ? Regime::noisy : Regime::noisy_outliers;
  cert.w_hat = rep.w_hat;
  cert.V_hat = complete_basis(rep.w_hat.w);
  const auto v0 = cert.V_hat.leftCols<3>();

  Eigen::VectorXd quad(kstar);
  for (int i = 0; i < kstar; ++i) quad(i) = rep.w_hat.w.dot(qs[i] * rep.w_hat.w);
  const double quad_mean = quad.mean();

  Eigen::Matrix3d proj_sum = Eigen::Matrix3d::Zero();
  for (int i = 0; i < kstar; ++i) proj_sum += v0.transpose() * qs[i] * v0;

  cert.mu_hat = quad.sum() - c.c_sq.head(kstar).sum();
  cert.d_blocks.reserve(ell);
  cert.S_blocks.reserve(kstar);
  cert.T_blocks.reserve(kstar);

  const double eta = rep.gap.eta;
  const double k = double(kstar);
  for (int i = 0; i < kstar; ++i) {
    const Eigen::Matrix3d t = (1.0 - eta * k / (k - 1.0)) * (v0.transpose() * qs[i] * v0) +
                              eta / (k - 1.0) * proj_sum -
                              quad_mean * Eigen::Matrix3d::Identity();
    Eigen::Matrix4d padded = Eigen::Matrix4d::Zero();
    padded.topLeftCorner<3, 3>() = 0.5 * (t + t.transpose());
    const Eigen::Matrix4d s_raw = cert.V_hat * padded * cert.V_hat.transpose();
    const Eigen::Matrix4d s = 0.5 * (s_raw + s_raw.transpose());
    cert.T_blocks.push_back(t);
    cert.S_blocks.push_back(s);
    cert.d_blocks.push_back(s - outlier_block(qs[i], c.c_sq(i)));
  }
  for (int j = kstar; j < ell; ++j) cert.d_blocks.push_back(outlier_block(qs[j], c.c_sq(j)));
  return cert;
}

TightnessReport verify_kkt(const Certificate& cert, const UnitQuaternion& w_hat,
                           const std::vector<DataMatrix>& qs, const TruncationParams& c,
                           const std::vector<uint8_t>& classification) {
  const int ell = static_cast<int>(qs.size());
  if (static_cast<int>(classification.size()) != ell ||
      static_cast<int>(cert.d_blocks.size()) != ell)
    throw std::invalid_argument("verify_kkt: size mismatch");

  TightnessReport rep;

  // O1: stationarity block residuals.
  double o1 = 0.0;
  for (int i = 0; i < ell; ++i) {
    Eigen::Matrix4d m;
    if (classification[i])
      m = 2.0 * cert.d_blocks[i] + qs[i] - c.c_sq(i) * Eigen::Matrix4d::Identity();
    else
      m = 2.0 * cert.d_blocks[i] + c.c_sq(i) * Eigen::Matrix4d::Identity() - qs[i];
    o1 = std::max(o1, (m * w_hat.w).norm());
  }
  rep.o1_residual = o1;

  // O2: full eigensolve of the assembled dual slack matrix.
  const BigMatrix slack = assemble_dual_slack(qs, c, cert.mu_hat, cert.d_blocks);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(slack.m, Eigen::EigenvaluesOnly);
  rep.o2_lambda_min = eig.eigenvalues()(0);

  // O3: objective-value exactness.
  double mu_expected = 0.0;
  for (int i = 0; i < ell; ++i)
    if (classification[i]) mu_expected += w_hat.w.dot(qs[i] * w_hat.w) - c.c_sq(i);
  rep.o3_gap = std::abs(cert.mu_hat - mu_expected);

  const double scale = 1.0 + assemble_bigQ(qs, c).m.norm();
  rep.tol_o13 = 1e-8 * scale;
  rep.tol_psd = 1e-8 * (1.0 + slack.m.norm());

  rep.verdict = (rep.o1_residual <= rep.tol_o13 && rep.o2_lambda_min >= -rep.tol_psd &&
                 rep.o3_gap <= rep.tol_o13)
                    ? Verdict::certified_tight
                    : Verdict::inconclusive;
  return rep;
}

}  // namespace rotsdr
