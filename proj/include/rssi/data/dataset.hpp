#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rssi {

enum class Condition { LoS, NLoS };

// Location labels L1..L40.
inline constexpr int kMinLocation = 1;
inline constexpr int kMaxLocation = 40;

// One measured or synthetic RSSI sample.
struct RssiRecord {
  double rssi_dbm = 0.0;
  double distance_m = 0.0;
  Condition condition = Condition::LoS;
  int location = kMinLocation;

  bool operator==(const RssiRecord&) const = default;
};

// [s, c, g]: distance in metres, condition code, category code.
struct FeatureTriple {
  double s = 0.0;
  int c = 0;
  int g = 0;

  bool operator==(const FeatureTriple&) const = default;
};

inline constexpr double kDistanceTolerance = 1e-9;

// Key equality used for sequence selection; distances within 1e-9 m match.
bool same_key(const FeatureTriple& a, const FeatureTriple& b);

// "[3,0,0]" style label; distances use their shortest round-trip form.
std::string to_string(const FeatureTriple& key);

// Parses "s,c,g" (brackets and spaces tolerated). Throws ValueError.
FeatureTriple parse_feature_triple(std::string_view text);

enum class DataSource { CsvFile, Synthetic };

struct Dataset {
  std::vector<RssiRecord> records;  // acquisition order
  DataSource source = DataSource::Synthetic;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// LoS -> 0, NLoS -> 1.
int encode_condition(Condition c);
// Inverse of encode_condition. Throws ValueError for codes other than 0/1.
Condition decode_condition(int code);
const char* condition_name(Condition c);

// L1 -> 0, L2..L12 -> 1, L13..L40 -> 2. Throws ValueError out of range.
int encode_category(int location);

// Throws ValueError for non-positive distance or invalid location.
FeatureTriple feature_triple(const RssiRecord& record);

// 3 x N matrix of [s, c, g] columns and the matching RSSI targets.
Eigen::MatrixXd feature_matrix(const Dataset& ds);
Eigen::VectorXd rssi_vector(const Dataset& ds);

// Deterministic shuffle then cut: |train| = round(fraction * N).
std::pair<Dataset, Dataset> split_random(const Dataset& ds,
                                         double train_fraction,
                                         std::uint64_t seed);

}  // namespace rssi
