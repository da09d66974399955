#pragma once

#include <filesystem>
#include <string>

#include "lvfuse/evaluation.hpp"

namespace lvfuse {

inline constexpr int kModelFormatVersion = 1;

/// Self-contained JSON document: schema, scaler, hyperparameters, latent
/// tables, scaled training data and fit metadata. See docs/model-format.md.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::string& text);

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace lvfuse
