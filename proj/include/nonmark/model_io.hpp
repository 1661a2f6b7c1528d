// model_io.hpp - JSON model definitions (built-in families and tabulated custom models)

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nonmark/model.hpp"

namespace nonmark::dynamics {

/// Piecewise-linear interpolant through (time, value) samples; constant
/// beyond either end. Times must be strictly increasing.
ScalarFunction tabulated(std::vector<double> times, std::vector<double> values);

/// Builds a model from
///   {"model": "damped_jc" | "detuned_jc" | "spin_bath", "params": {...}}
/// or
///   {"model": "custom", "dim": d, "time_unit": "...",
///    "hamiltonian": [{"op": M, "coefficient": c}, ...],
///    "channels": [{"label": "...", "jump": M, "rate": c}, ...],
///    "singular_times": [t, ...]}
/// where M is a list of rows whose entries are numbers or [re, im] pairs and
/// c is a number or a table [[t, value], ...].
TimeLocalModel model_from_json(const nlohmann::json& j);
TimeLocalModel load_model(const std::filesystem::path& path);

ComplexMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json descriptor_to_json(const ModelDescriptor& d);

} // namespace nonmark::dynamics
