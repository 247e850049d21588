#pragma once

#include <string>

#include "rotsdr/bounds.hpp"
#include "rotsdr/cert.hpp"
#include "rotsdr/sdr.hpp"
#include "rotsdr/synth.hpp"
#include <json.hpp>

namespace rotsdr {

using json = nlohmann::json;

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

SolveOptions solve_options_from_json(const json& j);
json solve_options_to_json(const SolveOptions& opts);

json sdr_solution_to_json(const SdrSolution& sol);
json certificate_to_json(const Certificate& cert, const TruncationParams& c);
json tightness_report_to_json(const TightnessReport& rep);

/// Finite doubles pass through; infinities become the string "inf"/"-inf"
/// (JSON has no literal for them).
json json_real(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace rotsdr
