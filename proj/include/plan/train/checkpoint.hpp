#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plan/model/plan_model.hpp"
#include "plan/train/adam.hpp"

namespace plan::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::PlanParams params;
  AdamState adam;
  model::Ablation ablation = model::Ablation::full;
  // Free-form key/value annotations (best epoch, accuracy, ...).
  std::map<std::string, std::string> metadata;
};

/// Canonical text of the model configuration; its CRC-32 is stored in the
/// header and re-checked on load.
std::string config_fingerprint(const model::ModelDims& dims, model::Ablation ablation);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);

/// Throws CheckpointError on a bad magic, version, checksum, config hash,
/// or when `expected` is given and the shape manifest does not match it.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                             const std::optional<model::ModelDims>& expected = std::nullopt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<model::ModelDims>& expected = std::nullopt);

}  // namespace plan::train
