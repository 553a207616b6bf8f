#pragma once

#include "saabo/gp_model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace saabo {

/// A fitted model list together with the search box it was fitted for.
struct SavedModel {
  ModelList models;
  std::optional<Bounds> bounds;
};

/// JSON document with `"schema": 1`, per-output hyperparameters and the
/// training data. Doubles are written with round-trip precision.
nlohmann::json model_to_json(const ModelList& models, const std::optional<Bounds>& bounds = std::nullopt);
/// Throws ConfigError on a malformed document or unknown schema version.
SavedModel model_from_json(const nlohmann::json& doc);

void save_model(const std::string& path, const ModelList& models,
                const std::optional<Bounds>& bounds = std::nullopt);
SavedModel load_model(const std::string& path);

}  // namespace saabo
