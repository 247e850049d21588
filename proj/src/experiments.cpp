#include "rotsdr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rotsdr/errors.hpp"
#include "rotsdr/log.hpp"
#include "rotsdr/rng.hpp"

namespace rotsdr {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GenConfig instance_config(const BatteryConfig& cfg, const GridPoint& g, uint64_t seed,
                          double cluster_dot) {
  GenConfig gen;
  gen.ell = g.ell;
  gen.kstar = g.kstar;
  gen.seed = seed;
  gen.noise = g.sigma > 0.0 ? NoiseModel::make_gaussian(g.sigma) : NoiseModel::make_none();
  gen.x_distribution = XDistribution::gaussian_unit;
  switch (cfg.regime) {
    case BatteryRegime::clean:
    case BatteryRegime::noisy:
      gen.outliers.type = OutlierType::none;
      break;
    case BatteryRegime::outliers:
    case BatteryRegime::large_c:
    case BatteryRegime::noisy_outliers:
      gen.outliers.type = OutlierType::random_gaussian;
      break;
    case BatteryRegime::gap:
      // Sphere outliers give lambda_min(Q_j) = 0, the unfilterable kind the
      // gap band is about.
      gen.outliers.type = OutlierType::random_sphere;
      break;
    case BatteryRegime::clustered:
      gen.outliers.type = OutlierType::clustered;
      gen.cluster_dot = cluster_dot;
      gen.x_distribution = XDistribution::uniform_sphere;
      break;
  }
  return gen;
}

}  // namespace

BatteryRegime battery_regime_from_string(const std::string& s) {
  if (s == "clean") return BatteryRegime::clean;
  if (s == "outliers") return BatteryRegime::outliers;
  if (s == "large-c" || s == "large_c") return BatteryRegime::large_c;
  if (s == "clustered") return BatteryRegime::clustered;
  if (s == "noisy") return BatteryRegime::noisy;
  if (s == "noisy-outliers" || s == "noisy_outliers") return BatteryRegime::noisy_outliers;
  if (s == "gap") return BatteryRegime::gap;
  throw std::invalid_argument("unknown battery regime: " + s);
}

std::string battery_regime_name(BatteryRegime r) {
  switch (r) {
    case BatteryRegime::clean: return "clean";
    case BatteryRegime::outliers: return "outliers";
    case BatteryRegime::large_c: return "large_c";
    case BatteryRegime::clustered: return "clustered";
    case BatteryRegime::noisy: return "noisy";
    case BatteryRegime::noisy_outliers: return "noisy_outliers";
    case BatteryRegime::gap: return "gap";
  }
  return "unknown";
}

uint64_t derive_seed(uint64_t battery_seed, int index) {
  return splitmix64(battery_seed + 0x9E3779B97F4A7C15ull * (uint64_t(index) + 1));
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TruncationParams derive_truncation(const Instance& inst, BatteryRegime regime,
                                   double c_fixed, double headroom, bool ideal_c) {
  const int ell = inst.ell;
  const int kstar = inst.kstar();
  const auto qs = inst.data_matrices();
  Eigen::VectorXd c2 = Eigen::VectorXd::Constant(ell, c_fixed);

  switch (regime) {
    case BatteryRegime::clean:
      break;
    case BatteryRegime::outliers:
    case BatteryRegime::clustered:
      for (int j = kstar; j < ell; ++j) {
        const double lmin = sym4_eigenvalues(qs[j])(0);
        // Clustered outliers have lambda_min = 0; keep c at the fixed value
        // there (the refutation regime does not need small c).
        if (regime == BatteryRegime::outliers) c2(j) = 0.5 * lmin;
      }
      break;
    case BatteryRegime::large_c: {
      const UnitQuaternion w_star = rot_to_quat(inst.R_star);
      for (int j = kstar; j < ell; ++j)
        c2(j) = 2.0 * w_star.w.dot(qs[j] * w_star.w);
      break;
    }
    case BatteryRegime::gap: {
      const UnitQuaternion w_star = rot_to_quat(inst.R_star);
      for (int j = kstar; j < ell; ++j)
        c2(j) = 0.5 * w_star.w.dot(qs[j] * w_star.w);
      break;
    }
    case BatteryRegime::noisy:
    case BatteryRegime::noisy_outliers: {
      const TruncationParams dummy = TruncationParams::uniform(ell, 1.0);
      const NoisyConditionReport rep = check_noisy_condition(qs, dummy, kstar);
      for (int i = 0; i < kstar; ++i) {
        const double base =
            ideal_c ? rep.rhs(i) - 0.5 * (std::abs(rep.d(i)) + rep.d(i)) : rep.rhs(i);
        c2(i) = base * headroom;
      }
      for (int j = kstar; j < ell; ++j) c2(j) = 0.5 * sym4_eigenvalues(qs[j])(0);
      break;
    }
  }
  return TruncationParams::from_vector(std::move(c2));
}

namespace {

BatteryRow run_one(const BatteryConfig& cfg, const GridPoint& g, int index) {
  const uint64_t seed = derive_seed(cfg.seed, index);
  double cluster_dot = 0.0;
  if (cfg.regime == BatteryRegime::clustered) {
    CounterRng rng(seed, 77);
    cluster_dot =
        cfg.cluster_dot_lo + (cfg.cluster_dot_hi - cfg.cluster_dot_lo) * rng.next_uniform();
  }

  const Instance inst = gen_instance(instance_config(cfg, g, seed, cluster_dot));
  const auto qs = inst.data_matrices();
  const int ell = inst.ell;
  const int kstar = inst.kstar();
  const TruncationParams c =
      derive_truncation(inst, cfg.regime, cfg.c_fixed, cfg.headroom, cfg.ideal_c);

  BatteryRow row;
  row.index = index;
  row.ell = ell;
  row.kstar = kstar;
  row.sigma = g.sigma;
  row.cluster_dot = cluster_dot;

  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  std::vector<uint8_t> truth(ell, 0);
  for (int i : inst.inlier_set) truth[i] = 1;

  const TlsSolution tls = tls_by_classification(qs, c, inst.inlier_set);
  row.tls_value = tls.value;
  row.tie_flag = tls.tie_flag;
  row.consistent = tls.consistent;
  row.zeta = eigengap(qs, inst.inlier_set).zeta;

  // Objective of the candidate lift (w from the inlier eigensolve, truth
  // classification): rejected pairs contribute their c_j^2.
  double lift_value = 0.0;
  for (int i = 0; i < ell; ++i)
    lift_value += truth[i] ? tls.w_hat.w.dot(qs[i] * tls.w_hat.w) : c.c_sq(i);
  row.lift_value = lift_value;

  switch (cfg.regime) {
    case BatteryRegime::clean:
    case BatteryRegime::outliers:
    case BatteryRegime::noisy:
    case BatteryRegime::noisy_outliers: {
      if (tls.tie_flag) {
        row.verdict = "tie_rejected";
        break;
      }
      try {
        Certificate cert;
        if (cfg.regime == BatteryRegime::clean)
          cert = cert_clean(qs, c);
        else if (cfg.regime == BatteryRegime::outliers)
          cert = cert_outliers_small_c(qs, c, kstar);
        else if (cfg.ideal_c)
          cert = cert_noisy_unchecked(qs, c, kstar);
        else
          cert = cert_noisy(qs, c, kstar);
        const UnitQuaternion w_for_cert =
            (cfg.regime == BatteryRegime::clean || cfg.regime == BatteryRegime::outliers)
                ? w_star
                : cert.w_hat;
        const TightnessReport rep = verify_kkt(cert, w_for_cert, qs, c, truth);
        row.o1 = rep.o1_residual;
        row.o2 = rep.o2_lambda_min;
        row.o3 = rep.o3_gap;
        row.verdict = verdict_name(rep.verdict);
      } catch (const regime_mismatch_error& e) {
        log_info(std::string("battery instance precondition failure: ") + e.what());
        row.verdict = "precondition_failed";
      }
      if (g.sigma > 0.0) {
        const ErrorBoundReport eb = error_bound(inst, tls.w_hat, inst.inlier_set);
        row.sin_sq_tau = eb.sin_sq_tau;
        row.bound_rhs = eb.rhs;
        row.bound_holds = eb.holds;
      } else {
        row.bound_holds = true;
      }
      break;
    }
    case BatteryRegime::large_c: {
      auto wit = refute_large_c(qs, c, w_star, kstar, kstar);
      if (wit) {
        row.witness_violation = wit->violation;
        row.verdict = wit->violation < 0.0 ? "refuted" : "no_witness";
      } else {
        row.verdict = "no_witness";
      }
      break;
    }
    case BatteryRegime::clustered: {
      const UnitQuaternion w_cl = *inst.outlier_model.w_cl;
      auto wit = refute_clustered(qs, c, w_star, w_cl, kstar);
      if (wit) {
        row.witness_violation = wit->violation;
        const double sum_in = c.c_sq.head(kstar).sum();
        const double sum_out = c.c_sq.tail(ell - kstar).sum();
        row.closed_form_violation =
            2.0 * sum_in * (1.0 - std::abs(w_cl.w.dot(w_star.w))) - sum_out;
        row.verdict = wit->violation < 0.0 ? "refuted" : "no_witness";
      } else {
        row.verdict = "no_witness";
      }
      break;
    }
    case BatteryRegime::gap:
      row.verdict = "probe";
      break;
  }

  if (cfg.solve) {
    const SdrSolution sol = solve_sdr(assemble_bigQ(qs, c), c, cfg.solver);
    row.solved = true;
    row.solver_converged = sol.converged;
    row.solver_objective = sol.objective;
    row.rank1_ratio = sol.rank1_ratio;
    row.gap = std::abs(sol.objective - row.tls_value);
    if (cfg.regime == BatteryRegime::gap) {
      const double tol_gap = std::max(1e-6, 10.0 * cfg.solver.tol);
      row.verdict = sol.objective < row.lift_value - tol_gap ? "nontight_observed"
                                                             : "tight_observed";
    }
  }
  return row;
}

}  // namespace

BatteryResult run_tightness_battery(const BatteryConfig& cfg) {
  if (cfg.grid.empty() || cfg.trials < 1)
    throw std::invalid_argument("run_tightness_battery: empty grid or trials < 1");

  const int n = static_cast<int>(cfg.grid.size()) * cfg.trials;
  BatteryResult result;
  result.config = cfg;
  result.rows.resize(n);

  parallel_for(n, cfg.jobs, [&](int idx) {
    const GridPoint& g = cfg.grid[idx / cfg.trials];
    result.rows[idx] = run_one(cfg, g, idx);
  });

  json counts = json::object();
  for (const auto& row : result.rows) {
    counts[row.verdict] = counts.value(row.verdict, 0) + 1;
  }
  result.summary = json{{"regime", battery_regime_name(cfg.regime)},
                        {"rows", n},
                        {"trials", cfg.trials},
                        {"seed", cfg.seed},
                        {"verdict_counts", counts}};
  return result;
}

std::string battery_rows_to_csv(const std::vector<BatteryRow>& rows) {
  std::ostringstream out;
  out << "index,ell,kstar,sigma,verdict,o1_residual,o2_lambda_min,o3_gap,"
         "solver_objective,tls_value,gap,rank1_ratio,zeta,sin_sq_tau,error_bound_rhs,"
         "error_bound_holds,tie_flag,consistent,solved,solver_converged,"
         "witness_violation,closed_form_violation,lift_value,cluster_dot\n";
  for (const auto& r : rows) {
    out << r.index << ',' << r.ell << ',' << r.kstar << ',' << fmt(r.sigma) << ','
        << r.verdict << ',' << fmt(r.o1) << ',' << fmt(r.o2) << ',' << fmt(r.o3) << ','
        << fmt(r.solver_objective) << ',' << fmt(r.tls_value) << ',' << fmt(r.gap) << ','
        << fmt(r.rank1_ratio) << ',' << fmt(r.zeta) << ',' << fmt(r.sin_sq_tau) << ','
        << fmt(r.bound_rhs) << ',' << (r.bound_holds ? 1 : 0) << ',' << (r.tie_flag ? 1 : 0)
        << ',' << (r.consistent ? 1 : 0) << ',' << (r.solved ? 1 : 0) << ','
        << (r.solver_converged ? 1 : 0) << ',' << fmt(r.witness_violation) << ','
        << fmt(r.closed_form_violation) << ',' << fmt(r.lift_value) << ','
        << fmt(r.cluster_dot) << '\n';
  }
  return out.str();
}

std::vector<EigengapRow> run_fig_eigengap(const std::vector<double>& sigmas, int ell,
                                          int trials, uint64_t seed, int jobs) {
  for (double s : sigmas)
    if (!(s > 0.0 && s <= 0.2))
      throw std::invalid_argument("run_fig_eigengap: sigma grid must lie in (0, 0.2]");

  const int n = static_cast<int>(sigmas.size()) * trials;
  std::vector<EigengapRow> rows(n);
  parallel_for(n, jobs, [&](int idx) {
    const int si = idx / trials;
    const int trial = idx % trials;
    GenConfig gen;
    gen.ell = ell;
    gen.kstar = ell;
    gen.noise = NoiseModel::make_gaussian(sigmas[si]);
    gen.seed = derive_seed(seed, idx);
    const Instance inst = gen_instance(gen);
    std::vector<int> all(ell);
    for (int i = 0; i < ell; ++i) all[i] = i;
    const EigengapResult gap = eigengap(inst.data_matrices(), all);
    rows[idx] = {sigmas[si], trial, gap.lambda_min, gap.lambda_min2, gap.zeta};
  });
  return rows;
}

std::string eigengap_rows_to_csv(const std::vector<EigengapRow>& rows) {
  std::ostringstream out;
  out << "sigma,trial,lambda_min,lambda_min2,zeta\n";
  for (const auto& r : rows)
    out << fmt(r.sigma) << ',' << r.trial << ',' << fmt(r.lambda_min) << ','
        << fmt(r.lambda_min2) << ',' << fmt(r.zeta) << '\n';
  return out.str();
}

std::vector<DiRow> run_fig_di(const std::vector<double>& sigmas, int ell, int trials,
                              uint64_t seed, int jobs) {
  for (double s : sigmas)
    if (!(s > 0.0 && s <= 0.2))
      throw std::invalid_argument("run_fig_di: sigma grid must lie in (0, 0.2]");

  const int n = static_cast<int>(sigmas.size()) * trials;
  std::vector<DiRow> rows(n);
  parallel_for(n, jobs, [&](int idx) {
    const int si = idx / trials;
    const int trial = idx % trials;
    GenConfig gen;
    gen.ell = ell;
    gen.kstar = ell;
    gen.noise = NoiseModel::make_gaussian(sigmas[si]);
    gen.seed = derive_seed(seed ^ 0x5DEECE66Dull, idx);
    const Instance inst = gen_instance(gen);
    const auto qs = inst.data_matrices();
    const TruncationParams dummy = TruncationParams::uniform(ell, 1.0);
    const NoisyConditionReport rep = check_noisy_condition(qs, dummy, ell);
    const double comparison =
        rep.w_hat.w.dot(qs[0] * rep.w_hat.w) + (qs[0] * rep.w_hat.w).norm();
    rows[idx] = {sigmas[si], trial, std::abs(rep.d(0)), comparison};
  });
  return rows;
}

std::string di_rows_to_csv(const std::vector<DiRow>& rows) {
  std::ostringstream out;
  out << "sigma,trial,d1_abs,comparison\n";
  for (const auto& r : rows)
    out << fmt(r.sigma) << ',' << r.trial << ',' << fmt(r.d1_abs) << ','
        << fmt(r.comparison) << '\n';
  return out.str();
}

std::vector<RatioRow> run_fig_ratio(const std::vector<int>& ells, int trials, uint64_t seed) {
  std::vector<RatioRow> rows;
  for (size_t k = 0; k < ells.size(); ++k) {
    const RatioStats stats =
        ratio_experiment(ells[k], trials, derive_seed(seed, static_cast<int>(k)));
    rows.insert(rows.end(), stats.rows.begin(), stats.rows.end());
  }
  return rows;
}

std::string ratio_rows_to_csv(const std::vector<RatioRow>& rows) {
  std::ostringstream out;
  out << "trial,ell,sum_norm_sq,lambda_min2,ratio\n";
  for (const auto& r : rows)
    out << r.trial << ',' << r.ell << ',' << fmt(r.sum_norm_sq) << ','
        << fmt(r.lambda_min2) << ',' << fmt(r.ratio) << '\n';
  return out.str();
}

}  // namespace rotsdr
