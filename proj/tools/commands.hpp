#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace rssi::cli {

// Bad flags or flag combinations; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenDataOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config_file;
  std::map<std::string, std::string> overrides;  // synthetic config key -> value
};

struct TrainOptions {
  std::string model;
  std::filesystem::path data;
  std::optional<std::string> sequence_key;
  std::uint64_t seed = 0;
  std::optional<std::string> optimizer;
  std::optional<double> learning_rate;
  std::optional<int> epochs;
  std::optional<std::string> batch;  // "full" or a size
  std::optional<double> dropout;
  int window = 1;
  double train_fraction = 0.8;
  std::filesystem::path out_dir;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::string split = "all";  // all | test
  std::optional<std::filesystem::path> out;
};

struct CompareOptions {
  std::string suite;
  std::optional<std::filesystem::path> spec_file;  // custom suite
  std::optional<std::filesystem::path> data;
  std::uint64_t seed = 0;
  double reference_mse = 45.25;
  int recurrent_window = 10;
  std::filesystem::path out_dir;
};

// Each command writes its outputs plus manifest.json (or <out>.manifest.json
// for gen-data) and returns the process exit code. `argv` is recorded in the
// manifest for replay.
int cmd_gen_data(const GenDataOptions& opt, const std::vector<std::string>& argv);
int cmd_train(const TrainOptions& opt, const std::vector<std::string>& argv);
int cmd_eval(const EvalOptions& opt, const std::vector<std::string>& argv);
int cmd_compare(const CompareOptions& opt, const std::vector<std::string>& argv);

// ./runs/<YYYYmmdd-HHMMSS>
std::filesystem::path default_out_dir();

// FNV-1a of the file bytes, 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

// Arguments recorded in a manifest, with `--out-dir`/`--out` replaced when
// `new_out` is set.
std::vector<std::string> replay_arguments(const nlohmann::json& manifest,
                                          const std::optional<std::string>& new_out);

}  // namespace rssi::cli
