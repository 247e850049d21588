#include "rotsdr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rotsdr {

namespace {

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json noise_to_json(const NoiseModel& nm) {
  switch (nm.type) {
    case NoiseType::none: return json{{"type", "none"}};
    case NoiseType::bounded: return json{{"type", "bounded"}, {"delta", nm.delta}};
    case NoiseType::gaussian: return json{{"type", "gaussian"}, {"sigma", nm.sigma}};
    case NoiseType::truncated_gaussian:
      return json{{"type", "truncated_gaussian"}, {"sigma", nm.sigma}, {"delta", nm.delta}};
  }
  return json{{"type", "none"}};
}

NoiseModel noise_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "none") return NoiseModel::make_none();
  if (type == "bounded") return NoiseModel::make_bounded(j.at("delta").get<double>());
  if (type == "gaussian") return NoiseModel::make_gaussian(j.at("sigma").get<double>());
  if (type == "truncated_gaussian")
    return NoiseModel::make_truncated(j.at("sigma").get<double>(), j.at("delta").get<double>());
  throw std::invalid_argument("unknown noise model: " + type);
}

json outlier_to_json(const OutlierModel& om) {
  switch (om.type) {
    case OutlierType::none: return json{{"type", "none"}};
    case OutlierType::random_sphere: return json{{"type", "random_sphere"}};
    case OutlierType::random_gaussian: return json{{"type", "random_gaussian"}};
    case OutlierType::clustered: {
      json j{{"type", "clustered"}};
      if (om.w_cl) {
        const auto& w = om.w_cl->w;
        j["w_cl"] = json::array({w(0), w(1), w(2), w(3)});
      }
      return j;
    }
  }
  return json{{"type", "none"}};
}

OutlierModel outlier_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  OutlierModel om;
  if (type == "none") {
    om.type = OutlierType::none;
  } else if (type == "random_sphere") {
    om.type = OutlierType::random_sphere;
  } else if (type == "random_gaussian") {
    om.type = OutlierType::random_gaussian;
  } else if (type == "clustered") {
    om.type = OutlierType::clustered;
    if (j.contains("w_cl")) {
      const auto& a = j.at("w_cl");
      om.w_cl = UnitQuaternion::from(
          Eigen::Vector4d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(),
                          a[3].get<double>()));
    }
  } else {
    throw std::invalid_argument("unknown outlier model: " + type);
  }
  return om;
}

}  // namespace

json json_real(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

json instance_to_json(const Instance& inst) {
  json j;
  j["seed"] = inst.seed;
  j["ell"] = inst.ell;
  j["kstar"] = inst.kstar();
  json rstar = json::array();
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) rstar.push_back(inst.R_star.R(r, col));
  j["R_star"] = rstar;
  j["noise_model"] = noise_to_json(inst.noise_model);
  j["outlier_model"] = outlier_to_json(inst.outlier_model);
  json pairs = json::array();
  for (int i = 0; i < inst.ell; ++i) {
    pairs.push_back(json{{"y", vec3_to_json(inst.pairs[i].y)},
                         {"x", vec3_to_json(inst.pairs[i].x)},
                         {"inlier", inst.is_inlier(i)}});
  }
  j["pairs"] = pairs;
  return j;
}

Instance instance_from_json(const json& j) {
  Instance inst;
  inst.seed = j.at("seed").get<uint64_t>();
  inst.ell = j.at("ell").get<int>();
  Eigen::Matrix3d r;
  const auto& rstar = j.at("R_star");
  if (rstar.size() != 9) throw std::invalid_argument("R_star must have 9 entries");
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r(row, col) = rstar[3 * row + col].get<double>();
  inst.R_star = Rotation::from(r);
  inst.noise_model = noise_from_json(j.at("noise_model"));
  inst.outlier_model = outlier_from_json(j.at("outlier_model"));

  const auto& pairs = j.at("pairs");
  if (static_cast<int>(pairs.size()) != inst.ell)
    throw std::invalid_argument("pair count does not match ell");
  for (int i = 0; i < inst.ell; ++i) {
    const auto& p = pairs[i];
    inst.pairs.push_back({vec3_from_json(p.at("y")), vec3_from_json(p.at("x"))});
    if (p.at("inlier").get<bool>()) inst.inlier_set.push_back(i);
  }
  // Noise is recoverable from the model: eps_i = y_i - R_star x_i on inliers.
  inst.eps.resize(inst.ell, Eigen::Vector3d::Zero());
  for (int i : inst.inlier_set)
    inst.eps[i] = inst.pairs[i].y - inst.R_star * inst.pairs[i].x;
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst).dump(2) + "\n");
}

Instance load_instance(const std::string& path) {
  return instance_from_json(json::parse(read_text_file(path)));
}

SolveOptions solve_options_from_json(const json& j) {
  SolveOptions opts;
  if (j.contains("tol")) opts.tol = j.at("tol").get<double>();
  if (j.contains("max_iter")) opts.max_iter = j.at("max_iter").get<int>();
  if (j.contains("rho0")) opts.rho0 = j.at("rho0").get<double>();
  if (j.contains("adapt")) opts.adapt = j.at("adapt").get<bool>();
  return opts;
}

json solve_options_to_json(const SolveOptions& opts) {
  return json{{"tol", opts.tol},
              {"max_iter", opts.max_iter},
              {"rho0", opts.rho0},
              {"adapt", opts.adapt}};
}

json sdr_solution_to_json(const SdrSolution& sol) {
  return json{{"objective", sol.objective},
              {"primal_residual", sol.primal_residual},
              {"dual_residual", sol.dual_residual},
              {"iterations", sol.iterations},
              {"rank1_ratio", json_real(sol.rank1_ratio)},
              {"converged", sol.converged},
              {"rho_final", sol.rho_final}};
}

json certificate_to_json(const Certificate& cert, const TruncationParams& c) {
  json blocks = json::array();
  for (const auto& b : cert.d_blocks) {
    json flat = json::array();
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) flat.push_back(b(r, col));
    blocks.push_back(flat);
  }
  json c_sq = json::array();
  for (int i = 0; i < c.size(); ++i) c_sq.push_back(c.c_sq(i));
  return json{{"mu_hat", cert.mu_hat},
              {"regime", regime_name(cert.regime)},
              {"d_blocks_row_major", blocks},
              {"c_sq", c_sq}};
}

json tightness_report_to_json(const TightnessReport& rep) {
  json j{{"o1_residual", rep.o1_residual},
         {"o2_lambda_min", rep.o2_lambda_min},
         {"o3_gap", rep.o3_gap},
         {"verdict", verdict_name(rep.verdict)},
         {"tol_o13", rep.tol_o13},
         {"tol_psd", rep.tol_psd}};
  if (rep.witness) {
    json zs = json::array();
    for (const auto& z : rep.witness->z_blocks)
      zs.push_back(json::array({z(0), z(1), z(2), z(3)}));
    j["witness"] = json{{"violation", rep.witness->violation}, {"z_blocks", zs}};
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rotsdr
