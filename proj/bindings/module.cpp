// Python bindings for the core operations: data matrices, synthetic
// instances, the TLS oracle, the SDR solver, and certificate verification.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rotsdr/bounds.hpp"
#include "rotsdr/cert.hpp"
#include "rotsdr/errors.hpp"
#include "rotsdr/experiments.hpp"
#include "rotsdr/io.hpp"
#include "rotsdr/sdr.hpp"
#include "rotsdr/synth.hpp"
#include "rotsdr/tls.hpp"

namespace py = pybind11;
using namespace rotsdr;

namespace {

TruncationParams c_from_object(const py::object& c, int ell) {
  if (py::isinstance<py::float_>(c) || py::isinstance<py::int_>(c))
    return TruncationParams::uniform(ell, c.cast<double>());
  return TruncationParams::from_vector(c.cast<Eigen::VectorXd>());
}

std::vector<DataMatrix> qs_from_list(const std::vector<Eigen::Matrix4d>& qs) {
  return {qs.begin(), qs.end()};
}

}  // namespace

PYBIND11_MODULE(_rotsdr, m) {
  m.doc() = "Robust rotation search: truncated least-squares, its semidefinite "
            "relaxation, and dual-certificate tightness verification";

  py::register_exception<regime_mismatch_error>(m, "RegimeMismatchError");

  // rotation algebra -------------------------------------------------------
  m.def("quat_to_rot",
        [](const Eigen::Vector4d& w) { return quat_to_rot(UnitQuaternion::from(w)).R; },
        py::arg("w"), "Rotation matrix of a unit quaternion (scalar-first)");
  m.def("rot_to_quat",
        [](const Eigen::Matrix3d& r) { return rot_to_quat(Rotation::from(r)).w; },
        py::arg("R"), "Canonical-sign unit quaternion of a rotation matrix");
  m.def("build_Q", &build_Q, py::arg("y"), py::arg("x"),
        "Per-pair 4x4 data matrix: w^T Q w = ||y - R(w) x||^2");
  m.def("q_spectrum_closed_form",
        [](const Eigen::Vector3d& y, const Eigen::Vector3d& x) {
          const auto s = q_spectrum_closed_form(y, x);
          return std::vector<double>(s.begin(), s.end());
        },
        py::arg("y"), py::arg("x"), "Closed-form eigenvalues of build_Q, descending");
  m.def("quat_angle",
        [](const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
          return quat_angle(UnitQuaternion::from(a), UnitQuaternion::from(b));
        },
        py::arg("w1"), py::arg("w2"), "Rotation angle between two unit quaternions");
  m.def("decompose_inlier",
        [](const Eigen::Vector3d& x, const Eigen::Matrix3d& r_star,
           const Eigen::Vector3d& eps) {
          const auto d = decompose_inlier(x, Rotation::from(r_star), eps);
          return py::make_tuple(d.P, d.E, d.eps_sq);
        },
        py::arg("x"), py::arg("R_star"), py::arg("eps"),
        "Split Q = P + E + ||eps||^2 I for an inlier pair");

  // synthetic instances ----------------------------------------------------
  m.def("generate_instance",
        [](int ell, int kstar, double sigma, const std::string& outliers,
           double cluster_dot, uint64_t seed) {
          GenConfig cfg;
          cfg.ell = ell;
          cfg.kstar = kstar;
          cfg.seed = seed;
          if (sigma > 0.0) cfg.noise = NoiseModel::make_gaussian(sigma);
          if (outliers == "none") cfg.outliers.type = OutlierType::none;
          else if (outliers == "random_gaussian") cfg.outliers.type = OutlierType::random_gaussian;
          else if (outliers == "random_sphere") cfg.outliers.type = OutlierType::random_sphere;
          else if (outliers == "clustered") {
            cfg.outliers.type = OutlierType::clustered;
            cfg.cluster_dot = cluster_dot;
            cfg.x_distribution = XDistribution::uniform_sphere;
          } else throw std::invalid_argument("unknown outlier model: " + outliers);
          return instance_to_json(gen_instance(cfg)).dump(2);
        },
        py::arg("ell"), py::arg("kstar"), py::arg("sigma") = 0.0,
        py::arg("outliers") = "none", py::arg("cluster_dot") = 0.9, py::arg("seed") = 0,
        "Generate an instance and return it as a JSON string");
  m.def("instance_data_matrices",
        [](const std::string& inst_json) {
          const Instance inst = instance_from_json(json::parse(inst_json));
          std::vector<Eigen::Matrix4d> qs;
          for (const auto& q : inst.data_matrices()) qs.push_back(q);
          return qs;
        },
        py::arg("instance_json"), "Data matrices Q_i of a JSON-encoded instance");

  // TLS --------------------------------------------------------------------
  m.def("tls_objective",
        [](const Eigen::Vector4d& w, const std::vector<Eigen::Matrix4d>& qs,
           const py::object& c) {
          return tls_objective(UnitQuaternion::from(w), qs_from_list(qs),
                               c_from_object(c, static_cast<int>(qs.size())));
        },
        py::arg("w"), py::arg("qs"), py::arg("c_sq"));
  m.def("tls_bruteforce",
        [](const std::vector<Eigen::Matrix4d>& qs, const py::object& c) {
          const auto sol =
              tls_bruteforce(qs_from_list(qs), c_from_object(c, static_cast<int>(qs.size())));
          return py::make_tuple(sol.w_hat.w, sol.theta, sol.value);
        },
        py::arg("qs"), py::arg("c_sq"),
        "Exact TLS global minimum by pattern enumeration (ell <= 16); returns "
        "(w_hat, theta, value)");
  m.def("tls_by_classification",
        [](const std::vector<Eigen::Matrix4d>& qs, const py::object& c,
           const std::vector<int>& inliers) {
          const auto sol = tls_by_classification(
              qs_from_list(qs), c_from_object(c, static_cast<int>(qs.size())), inliers);
          return py::make_tuple(sol.w_hat.w, sol.value, sol.consistent, sol.eigengap);
        },
        py::arg("qs"), py::arg("c_sq"), py::arg("inlier_set"),
        "Eigen-solve the inlier-restricted sum; returns (w_hat, value, consistent, "
        "eigengap)");

  // SDR --------------------------------------------------------------------
  m.def("solve_sdr",
        [](const std::vector<Eigen::Matrix4d>& qs, const py::object& c, double tol,
           int max_iter) {
          const auto cc = c_from_object(c, static_cast<int>(qs.size()));
          SolveOptions opts;
          opts.tol = tol;
          opts.max_iter = max_iter;
          const auto sol = solve_sdr(assemble_bigQ(qs_from_list(qs), cc), cc, opts);
          py::dict out;
          out["objective"] = sol.objective;
          out["rank1_ratio"] = sol.rank1_ratio;
          out["iterations"] = sol.iterations;
          out["converged"] = sol.converged;
          out["primal_residual"] = sol.primal_residual;
          out["dual_residual"] = sol.dual_residual;
          out["W"] = sol.W.m;
          return out;
        },
        py::arg("qs"), py::arg("c_sq"), py::arg("tol") = 1e-9,
        py::arg("max_iter") = 50000);
  m.def("extract_quaternion",
        [](const Eigen::MatrixXd& w) {
          auto [q, ratio] = extract_quaternion(BigMatrix(w));
          return py::make_tuple(q.w, ratio);
        },
        py::arg("W"), "Leading-eigenvector quaternion and rank-one ratio");

  // certificates -----------------------------------------------------------
  m.def("certify",
        [](const std::string& inst_json, const std::string& regime, double c2,
           double headroom) {
          const Instance inst = instance_from_json(json::parse(inst_json));
          const auto qs = inst.data_matrices();
          const BatteryRegime reg = battery_regime_from_string(regime);
          const TruncationParams c = derive_truncation(inst, reg, c2, headroom, false);
          const UnitQuaternion w_star = rot_to_quat(inst.R_star);
          std::vector<uint8_t> truth(inst.ell, 0);
          for (int i : inst.inlier_set) truth[i] = 1;
          Certificate cert;
          UnitQuaternion w_for_cert = w_star;
          if (reg == BatteryRegime::clean) {
            cert = cert_clean(qs, c);
          } else if (reg == BatteryRegime::outliers) {
            cert = cert_outliers_small_c(qs, c, inst.kstar());
          } else if (reg == BatteryRegime::noisy || reg == BatteryRegime::noisy_outliers) {
            cert = cert_noisy(qs, c, inst.kstar());
            w_for_cert = cert.w_hat;
          } else {
            throw std::invalid_argument("certify: unsupported regime " + regime);
          }
          const TightnessReport rep = verify_kkt(cert, w_for_cert, qs, c, truth);
          return tightness_report_to_json(rep).dump(2);
        },
        py::arg("instance_json"), py::arg("regime"), py::arg("c2") = 1.0,
        py::arg("headroom") = 1.1,
        "Build the regime's dual certificate and run the KKT check; returns the "
        "report as JSON");
  m.def("eigengap",
        [](const std::vector<Eigen::Matrix4d>& qs, const std::vector<int>& subset) {
          const auto g = eigengap(qs_from_list(qs), subset);
          return py::make_tuple(g.lambda_min, g.lambda_min2, g.zeta, g.eta);
        },
        py::arg("qs"), py::arg("subset"));

  // bounds -----------------------------------------------------------------
  m.def("lambda_min2_closed_form", &lambda_min2_closed_form, py::arg("xs"));
  m.def("ratio_experiment",
        [](int ell, int trials, uint64_t seed) {
          const auto stats = ratio_experiment(ell, trials, seed);
          return py::make_tuple(stats.fraction_in_band, stats.mean);
        },
        py::arg("ell"), py::arg("trials"), py::arg("seed") = 0,
        "Returns (fraction of ratios in [1/4, 3/4], mean ratio)");
}
