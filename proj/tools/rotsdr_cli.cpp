// Command-line front end: instance generation, SDR solving, certificate
// verification, and the theorem/figure batteries. All numerics go to JSON
// or CSV files; exit codes are the only out-of-band signal.
//   0 success, 1 usage error, 2 regime mismatch, 3 solver non-convergence.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotsdr/errors.hpp"
#include "rotsdr/experiments.hpp"
#include "rotsdr/io.hpp"
#include "rotsdr/log.hpp"

namespace {

using namespace rotsdr;

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

struct CertifyArgs {
  std::string regime;
  std::string input;
  std::string output;
  double c2 = 1.0;
  double headroom = 1.1;
};

int run_certify(const CertifyArgs& args) {
  const Instance inst = load_instance(args.input);
  const auto qs = inst.data_matrices();
  const int kstar = inst.kstar();
  const BatteryRegime regime = battery_regime_from_string(args.regime);

  const TruncationParams c = derive_truncation(inst, regime, args.c2, args.headroom, false);
  const UnitQuaternion w_star = rot_to_quat(inst.R_star);
  std::vector<uint8_t> truth(inst.ell, 0);
  for (int i : inst.inlier_set) truth[i] = 1;

  TightnessReport report;
  switch (regime) {
    case BatteryRegime::clean: {
      const Certificate cert = cert_clean(qs, c);
      report = verify_kkt(cert, w_star, qs, c, truth);
      break;
    }
    case BatteryRegime::outliers: {
      const Certificate cert = cert_outliers_small_c(qs, c, kstar);
      report = verify_kkt(cert, w_star, qs, c, truth);
      break;
    }
    case BatteryRegime::noisy:
    case BatteryRegime::noisy_outliers: {
      const Certificate cert = cert_noisy(qs, c, kstar);
      report = verify_kkt(cert, cert.w_hat, qs, c, truth);
      break;
    }
    case BatteryRegime::large_c: {
      if (kstar >= inst.ell)
        throw regime_mismatch_error("large-c regime requires at least one outlier");
      auto wit = refute_large_c(qs, c, w_star, kstar, kstar);
      if (wit && wit->violation < 0.0) {
        report.verdict = Verdict::refuted;
        report.witness = *wit;
      } else {
        report.verdict = Verdict::inconclusive;
      }
      break;
    }
    case BatteryRegime::clustered: {
      if (!inst.outlier_model.w_cl)
        throw regime_mismatch_error("clustered regime requires w_cl in the instance");
      auto wit = refute_clustered(qs, c, w_star, *inst.outlier_model.w_cl, kstar);
      if (wit && wit->violation < 0.0) {
        report.verdict = Verdict::refuted;
        report.witness = *wit;
      } else {
        report.verdict = Verdict::inconclusive;
      }
      break;
    }
    case BatteryRegime::gap:
      throw regime_mismatch_error("the gap regime has no certificate; use `battery --regime gap`");
  }

  write_text_file(args.output, tightness_report_to_json(report).dump(2) + "\n");
  log_info("certify: verdict " + verdict_name(report.verdict));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust rotation search: TLS, its semidefinite relaxation, and "
               "dual-certificate tightness checks"};
  app.require_subcommand(1);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic instance as JSON");
  int gen_ell = 10, gen_kstar = -1;
  double gen_sigma = 0.0, gen_delta = -1.0;
  std::string gen_outliers = "none", gen_xdist = "gaussian", gen_out;
  double gen_cluster_dot = 0.9;
  uint64_t gen_seed = 0;
  gen_cmd->add_option("--ell", gen_ell, "Number of point pairs");
  gen_cmd->add_option("--kstar", gen_kstar, "Number of inliers (default: ell)");
  gen_cmd->add_option("--sigma", gen_sigma, "Gaussian noise level");
  gen_cmd->add_option("--delta", gen_delta, "Bounded noise radius (overrides sigma)");
  gen_cmd->add_option("--outliers", gen_outliers,
                      "none | random_gaussian | random_sphere | clustered");
  gen_cmd->add_option("--cluster-dot", gen_cluster_dot, "|w_cl^T w*| for clustered outliers");
  gen_cmd->add_option("--x-dist", gen_xdist, "gaussian | sphere");
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("-o,--output", gen_out, "Output path")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve the SDR for an instance");
  std::string solve_in, solve_out, solve_opts_path;
  double solve_c2 = 1.0;
  std::string solve_c_policy = "fixed";
  double solve_headroom = 1.1;
  bool solve_yc = false;
  solve_cmd->add_option("-i,--input", solve_in, "Instance JSON")->required();
  solve_cmd->add_option("-o,--output", solve_out, "Solution summary JSON")->required();
  solve_cmd->add_option("--opts", solve_opts_path, "Solver options JSON file");
  solve_cmd->add_option("--c2", solve_c2, "Scalar truncation parameter");
  solve_cmd->add_option("--c-policy", solve_c_policy,
                        "fixed | outliers-half-lmin | noisy-headroom");
  solve_cmd->add_option("--headroom", solve_headroom, "Headroom for noisy-headroom policy");
  solve_cmd->add_flag("--yc", solve_yc, "Solve the block-diagonal variant instead");

  // certify
  auto* cert_cmd = app.add_subcommand("certify", "Build and verify a dual certificate");
  CertifyArgs cert_args;
  cert_cmd->add_option("--regime", cert_args.regime,
                       "clean | outliers | noisy | noisy-outliers | large-c | clustered")
      ->required();
  cert_cmd->add_option("-i,--input", cert_args.input, "Instance JSON")->required();
  cert_cmd->add_option("-o,--output", cert_args.output, "Report JSON")->required();
  cert_cmd->add_option("--c2", cert_args.c2, "Inlier truncation parameter");
  cert_cmd->add_option("--headroom", cert_args.headroom, "Noisy-condition headroom");

  // battery
  auto* bat_cmd = app.add_subcommand("battery", "Run a tightness battery over instances");
  std::string bat_regime = "clean", bat_out, bat_summary, bat_config;
  int bat_ell = 10, bat_kstar = -1, bat_trials = 10, bat_jobs = 0;
  double bat_sigma = 0.0, bat_c2 = 1.0, bat_headroom = 1.1;
  double bat_dot_lo = 0.8, bat_dot_hi = 0.95;
  uint64_t bat_seed = 0;
  bool bat_solve = false, bat_ideal_c = false;
  bat_cmd->add_option("--regime", bat_regime, "Battery regime");
  bat_cmd->add_option("--config", bat_config, "Battery config JSON (flags override)");
  bat_cmd->add_option("--ell", bat_ell, "Pairs per instance");
  bat_cmd->add_option("--kstar", bat_kstar, "Inliers per instance (default: ell)");
  bat_cmd->add_option("--sigma", bat_sigma, "Gaussian noise level");
  bat_cmd->add_option("--trials", bat_trials, "Instances per grid point");
  bat_cmd->add_option("--seed", bat_seed, "Battery seed");
  bat_cmd->add_option("--c2", bat_c2, "Inlier truncation parameter");
  bat_cmd->add_option("--headroom", bat_headroom, "Noisy-condition headroom");
  bat_cmd->add_option("--cluster-dot-lo", bat_dot_lo, "Clustered |w_cl^T w*| band lower edge");
  bat_cmd->add_option("--cluster-dot-hi", bat_dot_hi, "Clustered |w_cl^T w*| band upper edge");
  bat_cmd->add_flag("--solve", bat_solve, "Also run the SDR solver per instance");
  bat_cmd->add_flag("--ideal-c", bat_ideal_c,
                    "Probe the conjectured simpler truncation condition");
  bat_cmd->add_option("--jobs", bat_jobs, "Worker threads (default: cores)");
  bat_cmd->add_option("-o,--output", bat_out, "Rows CSV")->required();
  bat_cmd->add_option("--summary", bat_summary, "Summary JSON");

  // figures
  auto* fe_cmd = app.add_subcommand("fig-eigengap", "Eigengap vs noise CSV");
  std::string fe_sigmas = "0.01,0.02,0.04,0.06,0.08,0.1", fe_out;
  int fe_ell = 100, fe_trials = 100, fe_jobs = 0;
  uint64_t fe_seed = 0;
  fe_cmd->add_option("--sigmas", fe_sigmas, "Comma-separated noise levels");
  fe_cmd->add_option("--ell", fe_ell, "Pairs per instance");
  fe_cmd->add_option("--trials", fe_trials, "Trials per noise level");
  fe_cmd->add_option("--seed", fe_seed, "Seed");
  fe_cmd->add_option("--jobs", fe_jobs, "Worker threads");
  fe_cmd->add_option("-o,--output", fe_out, "Output CSV")->required();

  auto* fd_cmd = app.add_subcommand("fig-di", "Truncation-condition d_1 term CSV");
  std::string fd_sigmas = "0.01,0.02,0.04,0.06,0.08,0.1", fd_out;
  int fd_ell = 100, fd_trials = 100, fd_jobs = 0;
  uint64_t fd_seed = 0;
  fd_cmd->add_option("--sigmas", fd_sigmas, "Comma-separated noise levels");
  fd_cmd->add_option("--ell", fd_ell, "Pairs per instance");
  fd_cmd->add_option("--trials", fd_trials, "Trials per noise level");
  fd_cmd->add_option("--seed", fd_seed, "Seed");
  fd_cmd->add_option("--jobs", fd_jobs, "Worker threads");
  fd_cmd->add_option("-o,--output", fd_out, "Output CSV")->required();

  auto* fr_cmd = app.add_subcommand("fig-ratio", "Spectral ratio concentration CSV");
  std::string fr_ells = "100,400", fr_out;
  int fr_trials = 100;
  uint64_t fr_seed = 0;
  fr_cmd->add_option("--ells", fr_ells, "Comma-separated point counts");
  fr_cmd->add_option("--trials", fr_trials, "Trials per ell");
  fr_cmd->add_option("--seed", fr_seed, "Seed");
  fr_cmd->add_option("-o,--output", fr_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen_cmd->parsed()) {
      GenConfig cfg;
      cfg.ell = gen_ell;
      cfg.kstar = gen_kstar < 0 ? gen_ell : gen_kstar;
      cfg.seed = gen_seed;
      if (gen_delta >= 0.0)
        cfg.noise = NoiseModel::make_bounded(gen_delta);
      else if (gen_sigma > 0.0)
        cfg.noise = NoiseModel::make_gaussian(gen_sigma);
      cfg.x_distribution =
          gen_xdist == "sphere" ? XDistribution::uniform_sphere : XDistribution::gaussian_unit;
      if (gen_outliers == "none") cfg.outliers.type = OutlierType::none;
      else if (gen_outliers == "random_gaussian") cfg.outliers.type = OutlierType::random_gaussian;
      else if (gen_outliers == "random_sphere") cfg.outliers.type = OutlierType::random_sphere;
      else if (gen_outliers == "clustered") {
        cfg.outliers.type = OutlierType::clustered;
        cfg.cluster_dot = gen_cluster_dot;
      } else throw CLI::ValidationError("--outliers", "unknown outlier model");
      save_instance(gen_instance(cfg), gen_out);
      return 0;
    }

    if (solve_cmd->parsed()) {
      const Instance inst = load_instance(solve_in);
      SolveOptions opts;
      if (!solve_opts_path.empty())
        opts = solve_options_from_json(json::parse(read_text_file(solve_opts_path)));
      BatteryRegime policy = BatteryRegime::clean;
      if (solve_c_policy == "outliers-half-lmin") policy = BatteryRegime::outliers;
      else if (solve_c_policy == "noisy-headroom") policy = BatteryRegime::noisy;
      else if (solve_c_policy != "fixed")
        throw CLI::ValidationError("--c-policy", "unknown policy");
      const TruncationParams c =
          derive_truncation(inst, policy, solve_c2, solve_headroom, false);
      const auto qs = inst.data_matrices();
      const SdrSolution sol =
          solve_yc ? solve_sdr_yc(qs, c, opts) : solve_sdr(assemble_bigQ(qs, c), c, opts);
      json out = sdr_solution_to_json(sol);
      try {
        auto [w, ratio] = extract_quaternion(sol.W);
        out["w_extracted"] = json::array({w.w(0), w.w(1), w.w(2), w.w(3)});
        out["extraction_rank1_ratio"] = json_real(ratio);
      } catch (const degenerate_extraction_error& e) {
        out["extraction_error"] = e.what();
      }
      write_text_file(solve_out, out.dump(2) + "\n");
      if (!sol.converged) {
        log_error("solver did not converge within max_iter");
        return 3;
      }
      return 0;
    }

    if (cert_cmd->parsed()) return run_certify(cert_args);

    if (bat_cmd->parsed()) {
      BatteryConfig cfg;
      if (!bat_config.empty()) {
        const json j = json::parse(read_text_file(bat_config));
        if (j.contains("regime")) bat_regime = j.at("regime").get<std::string>();
        if (j.contains("ell")) bat_ell = j.at("ell").get<int>();
        if (j.contains("kstar")) bat_kstar = j.at("kstar").get<int>();
        if (j.contains("sigma")) bat_sigma = j.at("sigma").get<double>();
        if (j.contains("trials")) bat_trials = j.at("trials").get<int>();
        if (j.contains("seed")) bat_seed = j.at("seed").get<uint64_t>();
        if (j.contains("c2")) bat_c2 = j.at("c2").get<double>();
        if (j.contains("headroom")) bat_headroom = j.at("headroom").get<double>();
        if (j.contains("solve")) bat_solve = j.at("solve").get<bool>();
        if (j.contains("solver")) cfg.solver = solve_options_from_json(j.at("solver"));
      }
      cfg.regime = battery_regime_from_string(bat_regime);
      cfg.grid = {GridPoint{bat_ell, bat_kstar < 0 ? bat_ell : bat_kstar, bat_sigma}};
      cfg.trials = bat_trials;
      cfg.seed = bat_seed;
      cfg.solve = bat_solve;
      cfg.c_fixed = bat_c2;
      cfg.headroom = bat_headroom;
      cfg.ideal_c = bat_ideal_c;
      cfg.cluster_dot_lo = bat_dot_lo;
      cfg.cluster_dot_hi = bat_dot_hi;
      cfg.jobs = bat_jobs;
      const BatteryResult result = run_tightness_battery(cfg);
      write_text_file(bat_out, battery_rows_to_csv(result.rows));
      if (!bat_summary.empty())
        write_text_file(bat_summary, result.summary.dump(2) + "\n");
      return 0;
    }

    if (fe_cmd->parsed()) {
      const auto rows =
          run_fig_eigengap(parse_double_list(fe_sigmas), fe_ell, fe_trials, fe_seed, fe_jobs);
      write_text_file(fe_out, eigengap_rows_to_csv(rows));
      return 0;
    }
    if (fd_cmd->parsed()) {
      const auto rows =
          run_fig_di(parse_double_list(fd_sigmas), fd_ell, fd_trials, fd_seed, fd_jobs);
      write_text_file(fd_out, di_rows_to_csv(rows));
      return 0;
    }
    if (fr_cmd->parsed()) {
      const auto rows = run_fig_ratio(parse_int_list(fr_ells), fr_trials, fr_seed);
      write_text_file(fr_out, ratio_rows_to_csv(rows));
      return 0;
    }
  } catch (const regime_mismatch_error& e) {
    log_error(e.what());
    std::cerr << "regime mismatch: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
