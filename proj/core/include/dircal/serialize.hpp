#pragma once

// Versioned JSON model files. Doubles are written in their shortest
// round-trip decimal form, so a load reproduces every parameter exactly.

#include <filesystem>
#include <string>

#include "dircal/model.hpp"

namespace dircal {

inline constexpr const char* kModelSchema = "dircal.model.v1";

std::string serialize_model(const EnsembleModel& model);
/// ParseError for malformed documents or an unknown schema; InvalidInput
/// when the parameters fail validation.
EnsembleModel deserialize_model(const std::string& text);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);

}  // namespace dircal
