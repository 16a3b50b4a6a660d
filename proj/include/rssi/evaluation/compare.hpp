#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rssi/data/dataset.hpp"
#include "rssi/evaluation/evaluate.hpp"
#include "rssi/training/train.hpp"

namespace rssi {

// One model to train and score. Without a sequence key the entry uses the
// whole dataset (random split); with one it uses the matching records
// (chronological split for sequence-scoped kinds).
struct ComparisonEntry {
  std::string name;
  ModelKind kind = ModelKind::FeatureAnn;
  TrainConfig config;  // config.seed is replaced by the entry's derived seed
  std::optional<FeatureTriple> sequence_key;
  Index window = 1;  // look-back for sequence-scoped kinds
};

struct ComparisonSpec {
  std::vector<ComparisonEntry> entries;
  std::uint64_t seed = 0;
  double train_fraction = kTrainFraction;
  double reference_mse = kDefaultReferenceMse;
};

// Feature ANN, OLS, RNN and LSTM on the full dataset; NAdam 0.001, 1800
// epochs, minibatch 32 for every trained family.
ComparisonSpec table2_suite(std::uint64_t seed);

inline constexpr Index kDefaultRecurrentWindow = 10;

// Sequence ANN, RNN and LSTM over the seven sequence keys; Adam 0.01, 200
// epochs, full batch. Dropout only for the sequence ANN.
ComparisonSpec table3_suite(std::uint64_t seed,
                            Index recurrent_window = kDefaultRecurrentWindow);
const std::vector<FeatureTriple>& table3_keys();

// {"seed", "train_fraction", "reference_mse", "entries": [{"name", "model",
// "sequence_key": "s,c,g" | null, "window", "config": {...}}]}. Config fields
// are optional and default per model kind.
ComparisonSpec comparison_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ComparisonSpec& spec);

// Per-kind defaults: the sequence defaults for the sequence ANN and for
// keyed recurrent baselines (without dropout), the feature defaults otherwise.
TrainConfig default_train_config(ModelKind kind, bool keyed);

struct FittedEntry {
  AnyModel model;
  TrainReport report;
  Eigen::MatrixXd test_inputs;  // raw, held out
  Eigen::VectorXd test_targets;
  Index train_samples = 0;
};

// Splits the entry's data slice, trains with `cfg` as given and returns the
// held-out inputs. Random splits use `split_seed`.
FittedEntry fit_entry(const Dataset& data, const ComparisonEntry& entry,
                      const TrainConfig& cfg, double train_fraction,
                      std::uint64_t split_seed);

// Matching records of a keyed slice; DataError when none match.
Dataset select_records(const Dataset& data, const FeatureTriple& key);

bool sequence_scoped(ModelKind kind);

// Derived seed of an entry: depends only on the base seed, the entry name and
// its data slice, never on its position in the spec.
std::uint64_t entry_seed(std::uint64_t base, const ComparisonEntry& entry);

struct ComparisonRow {
  std::string name;
  ModelKind kind = ModelKind::FeatureAnn;
  std::optional<FeatureTriple> sequence_key;
  Index window = 1;
  std::uint64_t seed = 0;
  Index train_samples = 0;
  Index test_samples = 0;
  double train_mse = 0.0;
  double train_rmse = 0.0;
  EvalMetrics test;
  double train_seconds = 0.0;
  std::vector<double> loss_history;
};

struct FamilySummary {
  std::string name;
  Index rows = 0;
  double mean_test_mse = 0.0;
  double improvement_pct = 0.0;  // against the reference MSE
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // spec order
  std::vector<FamilySummary> families;  // first-appearance order
  double reference_mse = kDefaultReferenceMse;
};

// Trains and scores every entry. Throws ValueError on an empty spec; an
// entry's failure is rethrown as Error naming the entry.
ComparisonTable build_comparison(const Dataset& data, const ComparisonSpec& spec);

// Row label: name, plus the bracketed key for sequence-scoped rows.
std::string row_label(const ComparisonRow& row);
// Stable file stem used for a row's loss CSV.
std::string row_slug(const ComparisonRow& row);

// Aligned text at 2 decimal places, CSV and full-precision JSON.
// `loss_paths` (if nonempty) gives one loss CSV path per row for the JSON.
std::string format_table_text(const ComparisonTable& table);
std::string format_table_csv(const ComparisonTable& table);
nlohmann::json table_to_json(const ComparisonTable& table,
                             const std::vector<std::string>& loss_paths = {});

}  // namespace rssi
