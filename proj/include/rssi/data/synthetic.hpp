#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "rssi/data/dataset.hpp"

namespace rssi {

// Log-distance path loss with log-normal shadowing:
//   RSSI(d) = pl0 - 10 n log10(d / 1 m) - [NLoS] penalty + N(0, sigma_cond)
struct SyntheticConfig {
  double pl0_dbm = -55.5;
  double exponent_los = 2.2;
  double nlos_penalty_db = 5.0;
  double sigma_los_db = 1.5;
  double sigma_nlos_db = 3.0;
  int samples_per_cell_min = 220;
  int samples_per_cell_max = 260;
  int scenario1_samples = 10000;

  // Throws ValueError on an invalid combination.
  void validate() const;

  // Flat key=value view, keys as in the config file format.
  std::map<std::string, std::string> to_map() const;
};

// Applies "key=value" lines ('#' comments and blank lines ignored) on top of
// `base`. Unknown keys and malformed values throw ValueError.
SyntheticConfig parse_synthetic_config(std::string_view text,
                                       SyntheticConfig base = {});
SyntheticConfig load_synthetic_config(const std::filesystem::path& path,
                                      SyntheticConfig base = {});

// Noise-free mean RSSI at distance d for the given condition.
double mean_rssi(const SyntheticConfig& cfg, double distance_m,
                 Condition condition);

// Scenario 3 geometry: L13..L40 map onto 0.2, 0.3, ..., 2.9 m.
double scenario3_distance(int location);

inline constexpr double kFixedDistanceM = 3.0;

struct ScenarioCounts {
  std::size_t fixed_location = 0;     // scenario 1, L1
  std::size_t varying_location = 0;   // scenario 2, L2..L12
  std::size_t varying_distance = 0;   // scenario 3, L13..L40
};

// Emits the three measurement scenarios in acquisition order: per scenario,
// all LoS cells then all NLoS cells. Deterministic under `seed`.
Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed,
                           ScenarioCounts* counts = nullptr);

}  // namespace rssi
