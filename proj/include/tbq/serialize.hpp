#pragma once

#include <string>

#include "json.hpp"
#include "tbq/hl_design.hpp"
#include "tbq/mimo_estimators.hpp"
#include "tbq/sim.hpp"

namespace tbq {

/// Complex matrices serialize as row-major nested arrays of [re, im] pairs.
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);

nlohmann::json design_to_json(const HLDesign& d);
nlohmann::json design_to_json(const SpatialDesign& d);

/// Parses an experiment config; unknown keys are rejected with the offending
/// field path in the message.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace tbq
