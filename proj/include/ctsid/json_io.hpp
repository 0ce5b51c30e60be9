#pragma once

#include <string>

#include <json.hpp>

#include "ctsid/closed_loop.hpp"
#include "ctsid/harness.hpp"
#include "ctsid/model.hpp"
#include "ctsid/projection.hpp"
#include "ctsid/riv.hpp"

namespace ctsid {

// Model schema:
// {"n_u": .., "n_y": .., "subsystems": [{"a": [a_1..a_n], "b": [B_0, .., B_m]}, ..]}
// where "a" omits the constant coefficient (always 1) and each B_j is an
// n_y x n_u row-major nested array.
nlohmann::json model_to_json(const AdditiveModel& model);
AdditiveModel model_from_json(const nlohmann::json& j);

// {"A": .., "B": .., "C": .., "D": .., "h": ..} with row-major nested arrays.
nlohmann::json controller_to_json(const DiscreteController& ctrl);
DiscreteController controller_from_json(const nlohmann::json& j);

// Model plus "sigma", "acov" (row-major), "iterations", "converged".
nlohmann::json riv_result_to_json(const RivResult& result);
RivResult riv_result_from_json(const nlohmann::json& j);

// {"modes": [{"xi", "omega", "psi_l", "psi_r"}, ..], "ps", "cost", "converged"}
nlohmann::json structured_to_json(const ModalParams& params, const ProjectionResult& result);

nlohmann::json benchmark_to_json(const BenchmarkSpec& spec);
BenchmarkSpec benchmark_from_json(const nlohmann::json& j);

nlohmann::json mc_config_to_json(const McConfig& mc);
McConfig mc_config_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace ctsid
