#include "rssi/data/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rssi/error.hpp"
#include "rssi/format.hpp"
#include "rssi/random.hpp"

namespace rssi {

void SyntheticConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ValueError("synthetic config: " + what);
  };
  if (!std::isfinite(pl0_dbm)) fail("pl0_dbm must be finite");
  if (!(exponent_los > 0.0) || !std::isfinite(exponent_los)) {
    fail("exponent_los must be positive");
  }
  if (!std::isfinite(nlos_penalty_db)) fail("nlos_penalty_db must be finite");
  if (!(sigma_los_db >= 0.0) || !(sigma_nlos_db >= 0.0) ||
      !std::isfinite(sigma_los_db) || !std::isfinite(sigma_nlos_db)) {
    fail("sigmas must be non-negative");
  }
  if (samples_per_cell_min < 1 || samples_per_cell_max < samples_per_cell_min) {
    fail("samples_per_cell range must satisfy 1 <= min <= max");
  }
  if (scenario1_samples < 1) fail("scenario1_samples must be >= 1");
}

std::map<std::string, std::string> SyntheticConfig::to_map() const {
  return {
      {"pl0_dbm", format_double(pl0_dbm)},
      {"exponent_los", format_double(exponent_los)},
      {"nlos_penalty_db", format_double(nlos_penalty_db)},
      {"sigma_los_db", format_double(sigma_los_db)},
      {"sigma_nlos_db", format_double(sigma_nlos_db)},
      {"samples_per_cell_min", std::to_string(samples_per_cell_min)},
      {"samples_per_cell_max", std::to_string(samples_per_cell_max)},
      {"scenario1_samples", std::to_string(scenario1_samples)},
  };
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void set_key(SyntheticConfig& cfg, const std::string& key,
             const std::string& value) {
  auto as_int = [&] { return static_cast<int>(parse_int(value)); };
  if (key == "pl0_dbm") {
    cfg.pl0_dbm = parse_double(value);
  } else if (key == "exponent_los") {
    cfg.exponent_los = parse_double(value);
  } else if (key == "nlos_penalty_db") {
    cfg.nlos_penalty_db = parse_double(value);
  } else if (key == "sigma_los_db") {
    cfg.sigma_los_db = parse_double(value);
  } else if (key == "sigma_nlos_db") {
    cfg.sigma_nlos_db = parse_double(value);
  } else if (key == "samples_per_cell_min") {
    cfg.samples_per_cell_min = as_int();
  } else if (key == "samples_per_cell_max") {
    cfg.samples_per_cell_max = as_int();
  } else if (key == "scenario1_samples") {
    cfg.scenario1_samples = as_int();
  } else {
    throw ValueError("synthetic config: unknown key '" + key + "'");
  }
}

}  // namespace

SyntheticConfig parse_synthetic_config(std::string_view text,
                                       SyntheticConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValueError("synthetic config line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    try {
      set_key(base, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ValueError& e) {
      throw ValueError("synthetic config line " + std::to_string(line_no) +
                       ": " + e.what());
    }
  }
  base.validate();
  return base;
}

SyntheticConfig load_synthetic_config(const std::filesystem::path& path,
                                      SyntheticConfig base) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot read synthetic config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_synthetic_config(buf.str(), base);
}

double mean_rssi(const SyntheticConfig& cfg, double distance_m,
                 Condition condition) {
  if (!(distance_m > 0.0)) throw ValueError("mean_rssi: distance must be > 0");
  double rssi = cfg.pl0_dbm - 10.0 * cfg.exponent_los * std::log10(distance_m);
  if (condition == Condition::NLoS) rssi -= cfg.nlos_penalty_db;
  return rssi;
}

double scenario3_distance(int location) {
  if (location < 13 || location > kMaxLocation) {
    throw ValueError("scenario 3 covers L13..L40, got L" +
                     std::to_string(location));
  }
  // L13 -> 0.2 m, L14 -> 0.3 m, ..., L40 -> 2.9 m. Integer numerator keeps
  // each distance the double nearest its decimal value.
  return static_cast<double>(location - 11) / 10.0;
}

Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed,
                           ScenarioCounts* counts) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_int_distribution<int> cell_count(cfg.samples_per_cell_min,
                                                cfg.samples_per_cell_max);
  std::normal_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.source = DataSource::Synthetic;
  ds.seed = seed;
  ScenarioCounts local;
  ScenarioCounts& cnt = counts != nullptr ? *counts : local;
  cnt = {};

  auto emit = [&](int location, double distance, Condition cond, int n) {
    const double mu = mean_rssi(cfg, distance, cond);
    const double sigma =
        cond == Condition::LoS ? cfg.sigma_los_db : cfg.sigma_nlos_db;
    for (int i = 0; i < n; ++i) {
      const double noise = sigma > 0.0 ? sigma * unit(rng) : 0.0;
      ds.records.push_back({mu + noise, distance, cond, location});
    }
  };

  const Condition conditions[] = {Condition::LoS, Condition::NLoS};
  for (auto cond : conditions) emit(1, kFixedDistanceM, cond, cfg.scenario1_samples);
  cnt.fixed_location = ds.size();

  for (auto cond : conditions) {
    for (int loc = 2; loc <= 12; ++loc) {
      emit(loc, kFixedDistanceM, cond, cell_count(rng));
    }
  }
  cnt.varying_location = ds.size() - cnt.fixed_location;

  for (auto cond : conditions) {
    for (int loc = 13; loc <= kMaxLocation; ++loc) {
      emit(loc, scenario3_distance(loc), cond, cell_count(rng));
    }
  }
  cnt.varying_distance =
      ds.size() - cnt.fixed_location - cnt.varying_location;
  return ds;
}

}  // namespace rssi
