#pragma once

#include "tabood/models/classifier.hpp"

#include <json.hpp>

#include <filesystem>

namespace tabood::models {

inline constexpr int kCheckpointVersion = 1;

/// Self-describing JSON checkpoint: architecture, input layout, standardizer,
/// flat parameter and buffer arrays, mandatory "version".
nlohmann::json to_json(const TrainedClassifier& model);
TrainedClassifier classifier_from_json(const nlohmann::json& j);

void save_checkpoint(const TrainedClassifier& model, const std::filesystem::path& path);
TrainedClassifier load_checkpoint(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace tabood::models
