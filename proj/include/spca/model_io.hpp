#pragma once

#include "spca/model.hpp"

#include <filesystem>
#include <string>

namespace spca {

inline constexpr const char* kModelFormat = "spca-model";
inline constexpr int kModelVersion = 1;

/// Self-describing JSON document with the training points inline.
std::string model_to_json(const SpcaModel& model);

/// Rebuilds the model; the first curve and its density are recomputed, so the
/// result transforms exactly like the saved model.
SpcaModel model_from_json(const std::string& text);

void save_model(const SpcaModel& model, const std::filesystem::path& path);
SpcaModel load_model(const std::filesystem::path& path);

}  // namespace spca
