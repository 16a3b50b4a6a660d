#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rssi/models/models.hpp"

namespace rssi {

inline constexpr const char* kCheckpointFormat = "rssi-estimator-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// A trained model plus the provenance needed to reproduce it.
struct Checkpoint {
  AnyModel model;
  nlohmann::json train_config = nlohmann::json::object();
  std::string config_hash;
  // Sequence-scoped models record the key they were trained on.
  std::optional<FeatureTriple> sequence_key;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);

// Rejects wrong format/version, unknown kinds, and parameter arrays whose
// sizes disagree with the declared topology (FormatError). When
// `expected_kind` is given, a checkpoint of another kind is rejected too.
Checkpoint checkpoint_from_json(const nlohmann::json& j,
                                std::optional<ModelKind> expected_kind = {});

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expected_kind = {});

// FNV-1a over the compact dump, as 16 hex digits.
std::string hash_json(const nlohmann::json& j);

}  // namespace rssi
