#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rotsdr/bounds.hpp"
#include "rotsdr/cert.hpp"
#include "rotsdr/io.hpp"
#include "rotsdr/sdr.hpp"
#include "rotsdr/synth.hpp"
#include "rotsdr/tls.hpp"

namespace rotsdr {

/// Battery regimes. `gap` probes the uncharacterized band
/// lambda_min(Q_j) < c_j^2 < w*^T Q_j w* and is report-only.
enum class BatteryRegime { clean, outliers, large_c, clustered, noisy, noisy_outliers, gap };

BatteryRegime battery_regime_from_string(const std::string& s);
std::string battery_regime_name(BatteryRegime r);

struct GridPoint {
  int ell = 10;
  int kstar = 10;
  double sigma = 0.0;
};

struct BatteryConfig {
  BatteryRegime regime = BatteryRegime::clean;
  std::vector<GridPoint> grid;
  int trials = 1;
  uint64_t seed = 0;
  SolveOptions solver;
  bool solve = false;         // also run the SDR solver per instance
  double c_fixed = 1.0;       // inlier truncation when not derived
  double headroom = 1.1;      // multiplier on the noisy-condition RHS
  bool ideal_c = false;       // probe: set c from w^T Q w + ||Q w|| only
  double cluster_dot_lo = 0.8;
  double cluster_dot_hi = 0.95;
  int jobs = 0;               // 0 -> hardware concurrency
};

struct BatteryRow {
  int index = 0;
  int ell = 0;
  int kstar = 0;
  double sigma = 0.0;
  std::string verdict;  // certified_tight | refuted | inconclusive | tie_rejected | no_witness
  double o1 = 0.0, o2 = 0.0, o3 = 0.0;
  double solver_objective = 0.0;
  double tls_value = 0.0;
  double gap = 0.0;  // |solver objective - TLS value| when solved
  double rank1_ratio = 0.0;
  double zeta = 0.0;
  double sin_sq_tau = 0.0;
  double bound_rhs = 0.0;
  bool bound_holds = false;
  bool tie_flag = false;
  bool consistent = false;
  bool solved = false;
  bool solver_converged = false;
  double witness_violation = 0.0;      // refutation regimes
  double closed_form_violation = 0.0;  // clustered regime
  double lift_value = 0.0;             // objective at the candidate lift
  double cluster_dot = 0.0;            // clustered regime
};

struct BatteryResult {
  BatteryConfig config;
  std::vector<BatteryRow> rows;
  json summary;
};

BatteryResult run_tightness_battery(const BatteryConfig& config);

std::string battery_rows_to_csv(const std::vector<BatteryRow>& rows);

struct EigengapRow {
  double sigma = 0.0;
  int trial = 0;
  double lambda_min = 0.0;
  double lambda_min2 = 0.0;
  double zeta = 0.0;
};
std::vector<EigengapRow> run_fig_eigengap(const std::vector<double>& sigmas, int ell,
                                          int trials, uint64_t seed, int jobs = 0);
std::string eigengap_rows_to_csv(const std::vector<EigengapRow>& rows);

struct DiRow {
  double sigma = 0.0;
  int trial = 0;
  double d1_abs = 0.0;
  double comparison = 0.0;  // w^T Q_1 w + ||Q_1 w||
};
std::vector<DiRow> run_fig_di(const std::vector<double>& sigmas, int ell, int trials,
                              uint64_t seed, int jobs = 0);
std::string di_rows_to_csv(const std::vector<DiRow>& rows);

std::vector<RatioRow> run_fig_ratio(const std::vector<int>& ells, int trials, uint64_t seed);
std::string ratio_rows_to_csv(const std::vector<RatioRow>& rows);

/// Derived per-pair truncation parameters for an instance of the given
/// regime: inliers use c_fixed (or the noisy-condition RHS x headroom in
/// noisy regimes), outliers use half their smallest eigenvalue except in
/// the large_c and gap regimes.
TruncationParams derive_truncation(const Instance& inst, BatteryRegime regime,
                                   double c_fixed, double headroom, bool ideal_c);

/// Deterministic per-instance seed derivation.
uint64_t derive_seed(uint64_t battery_seed, int index);

/// Runs fn(0..n-1) across `jobs` threads (0 = hardware concurrency);
/// results must be written to disjoint slots by index.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

double median(std::vector<double> values);

}  // namespace rotsdr
