#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "l3inv/dataset.hpp"
#include "l3inv/neuralnet.hpp"

namespace l3inv::nn {

inline constexpr int kCheckpointSchemaVersion = 1;

/// Feature and target transforms a model was trained with. Stored alongside
/// the weights so a checkpoint can be applied to raw curves on its own.
struct Preprocessing {
    data::Normalization normalization;
    data::TargetBounds target_bounds;

    friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

struct Checkpoint {
    MlpModel model;
    std::optional<Preprocessing> preprocessing;
    std::string run_config;  // compact JSON, may be empty

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// JSON text: schema_version, config, then per-layer weights (row-major) and biases.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws IoError, SchemaMismatch, or CorruptData.
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

[[nodiscard]] std::string to_json_text(const Checkpoint& checkpoint);
[[nodiscard]] Checkpoint from_json_text(const std::string& text);

}  // namespace l3inv::nn
