#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "rotsdr/rotmath.hpp"
#include "rotsdr/tls.hpp"

namespace rotsdr {

/// Block-structured symmetric matrix of size 4(ell+1). Block (i, j) is the
/// 4x4 submatrix at rows 4i..4i+3, columns 4j..4j+3.
struct BigMatrix {
  Eigen::MatrixXd m;

  explicit BigMatrix(int ell) : m(Eigen::MatrixXd::Zero(4 * (ell + 1), 4 * (ell + 1))) {}
  explicit BigMatrix(Eigen::MatrixXd mat) : m(std::move(mat)) {}

  int ell() const { return static_cast<int>(m.rows()) / 4 - 1; }
  Eigen::Block<Eigen::MatrixXd, 4, 4> block(int i, int j) {
    return m.block<4, 4>(4 * i, 4 * j);
  }
  Eigen::Block<const Eigen::MatrixXd, 4, 4> block(int i, int j) const {
    return m.block<4, 4>(4 * i, 4 * j);
  }
};

/// Which affine constraint family the solver projects onto.
///   lifted:   [W]_{0i} = [W]_{ii},  trace([W]_{00}) = 1
///   yc:       [W]_{00} = [W]_{ii},  trace([W]_{00}) = 1
enum class ConstraintMode { lifted, yc };

struct SolveOptions {
  double tol = 1e-9;        // relative primal/dual residual target
  int max_iter = 50000;
  double rho0 = 0.0;        // 0 -> ||Q||_F / (ell+1)
  bool adapt = true;        // residual-balancing rho adaptation
  double over_relax = 1.0;  // relaxation parameter alpha in (0, 2)
  bool warm_start = false;  // start from a rank-one lift guess
};

struct SdrSolution {
  BigMatrix W{0};
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double rank1_ratio = 0.0;  // lambda_1 / lambda_2 of W; +inf when rank one
  bool converged = false;
  double rho_final = 0.0;
};

/// The lifted data matrix: [Q]_{0i} = [Q]_{i0} = (Q_i - c_i^2 I)/2, rest zero.
BigMatrix assemble_bigQ(const std::vector<DataMatrix>& qs, const TruncationParams& c);

/// All zero except [B]_{00} = I4.
BigMatrix assemble_B(int ell);

/// Full dual-variable matrix from its defining blocks [D]_{0i}:
/// [D]_{ii} = -2 [D]_{0i}, symmetric, rest zero.
BigMatrix assemble_D(const std::vector<Eigen::Matrix4d>& d0i_blocks);

/// Rank-one lift of (w0, theta): the outer product of [w0; theta_1 w0; ...].
BigMatrix lift(const UnitQuaternion& w0, const std::vector<uint8_t>& theta);

/// Objective trace(bigQ * W) + sum c_i^2 of the lifted program.
double sdr_objective(const BigMatrix& bigQ, const BigMatrix& W, const TruncationParams& c);

/// Operator-splitting solver: alternates closed-form projection onto the
/// affine constraints with projection onto the PSD cone (full
/// eigendecomposition, negative eigenvalues clipped). Non-convergence is
/// reported through `converged`, never thrown.
SdrSolution solve_sdr(const BigMatrix& bigQ, const TruncationParams& c,
                      const SolveOptions& opts = {});

/// solve_sdr starting from a feasible guess (typically a rank-one lift of
/// the TLS solution); the dual is still built from scratch.
SdrSolution solve_sdr_from(const BigMatrix& bigQ, const TruncationParams& c,
                           const BigMatrix& init, const SolveOptions& opts = {});

/// Leading-eigenvector extraction. Throws degenerate_extraction_error when
/// block 0 of the leading eigenvector has norm below 1e-6.
std::pair<UnitQuaternion, double> extract_quaternion(const BigMatrix& W);

/// Appendix-B variant: block-diagonal Q' with [Q']_{ii} = Q_i, paired with
/// the bigQ of assemble_bigQ. Objective is
/// (trace(Q'A) + trace(QA) + sum c_i^2) / 2 under the full block equality
/// [A]_{00} = [A]_{ii}.
std::pair<BigMatrix, BigMatrix> assemble_bigQ_yc(const std::vector<DataMatrix>& qs,
                                                 const TruncationParams& c);

SdrSolution solve_sdr_yc(const std::vector<DataMatrix>& qs, const TruncationParams& c,
                         const SolveOptions& opts = {});

/// Orthogonal projection onto the affine constraint set (exposed for tests:
/// it is idempotent).
Eigen::MatrixXd project_affine(const Eigen::MatrixXd& m, ConstraintMode mode);

}  // namespace rotsdr
