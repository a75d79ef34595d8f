#pragma once

#include <nlohmann/json.hpp>

#include "cellfa/efa.hpp"

namespace cellfa {

// Core FactorModel fields: dimensions, pattern (row-major), phi, uniqueness,
// communalities, explained variance, rotation tag and convergence flags.
nlohmann::json model_to_json(const FactorModel& model);

FactorModel model_from_json(const nlohmann::json& doc);

}  // namespace cellfa
