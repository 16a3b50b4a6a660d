#include "rssi/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "rssi/error.hpp"
#include "rssi/format.hpp"
#include "rssi/random.hpp"

namespace rssi {

bool same_key(const FeatureTriple& a, const FeatureTriple& b) {
  return a.c == b.c && a.g == b.g && std::abs(a.s - b.s) <= kDistanceTolerance;
}

std::string to_string(const FeatureTriple& key) {
  return "[" + format_double(key.s) + "," + std::to_string(key.c) + "," +
         std::to_string(key.g) + "]";
}

FeatureTriple parse_feature_triple(std::string_view text) {
  std::string cleaned;
  for (char ch : text) {
    if (ch != '[' && ch != ']' && ch != ' ') cleaned.push_back(ch);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = cleaned.find(',', start);
    parts.push_back(cleaned.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) {
    throw ValueError("sequence key must have the form s,c,g: '" +
                     std::string(text) + "'");
  }
  FeatureTriple key;
  key.s = parse_double(parts[0]);
  key.c = static_cast<int>(parse_int(parts[1]));
  key.g = static_cast<int>(parse_int(parts[2]));
  if (!(key.s > 0.0) || !std::isfinite(key.s)) {
    throw ValueError("sequence key distance must be positive: '" +
                     std::string(text) + "'");
  }
  if (key.c < 0 || key.c > 1) {
    throw ValueError("sequence key condition must be 0 or 1: '" +
                     std::string(text) + "'");
  }
  if (key.g < 0 || key.g > 2) {
    throw ValueError("sequence key category must be 0, 1 or 2: '" +
                     std::string(text) + "'");
  }
  return key;
}

int encode_condition(Condition c) { return c == Condition::LoS ? 0 : 1; }

Condition decode_condition(int code) {
  switch (code) {
    case 0:
      return Condition::LoS;
    case 1:
      return Condition::NLoS;
    default:
      throw ValueError("condition code must be 0 or 1, got " +
                       std::to_string(code));
  }
}

const char* condition_name(Condition c) {
  return c == Condition::LoS ? "LoS" : "NLoS";
}

int encode_category(int location) {
  if (location < kMinLocation || location > kMaxLocation) {
    throw ValueError("location L" + std::to_string(location) +
                     " outside L1..L40");
  }
  if (location == 1) return 0;
  if (location <= 12) return 1;
  return 2;
}

FeatureTriple feature_triple(const RssiRecord& record) {
  if (!(record.distance_m > 0.0)) {
    throw ValueError("distance must be positive, got " +
                     format_double(record.distance_m));
  }
  return {record.distance_m, encode_condition(record.condition),
          encode_category(record.location)};
}

Eigen::MatrixXd feature_matrix(const Dataset& ds) {
  Eigen::MatrixXd x(3, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto key = feature_triple(ds.records[i]);
    x.col(static_cast<Eigen::Index>(i)) << key.s, key.c, key.g;
  }
  return x;
}

Eigen::VectorXd rssi_vector(const Dataset& ds) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = ds.records[i].rssi_dbm;
  }
  return y;
}

std::pair<Dataset, Dataset> split_random(const Dataset& ds,
                                         double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValueError("split_random: train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  if (n < 2) throw ValueError("split_random: need at least 2 records");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  // Both halves stay nonempty.
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(
          std::llround(train_fraction * static_cast<double>(n))),
      1, n - 1);

  Dataset train{{}, ds.source, ds.seed};
  Dataset test{{}, ds.source, ds.seed};
  train.records.reserve(n_train);
  test.records.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).records.push_back(ds.records[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace rssi
