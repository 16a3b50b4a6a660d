#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "rssi/data/dataset.hpp"
#include "rssi/data/sequence.hpp"
#include "rssi/models/models.hpp"
#include "rssi/numerics/optimizer.hpp"

namespace rssi {

// batch_size 0 means full batch.
struct BatchPolicy {
  Index batch_size = 0;

  static BatchPolicy full() { return {0}; }
  static BatchPolicy mini(Index size) { return {size}; }
  bool is_full() const { return batch_size == 0; }
  bool operator==(const BatchPolicy&) const = default;
};

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::NAdam;
  double learning_rate = 0.001;
  int epochs = 1800;
  BatchPolicy batch = BatchPolicy::mini(32);
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  // Throws ValueError: lr > 0, epochs >= 1, dropout in [0, 1), batch >= 0.
  void validate() const;

  // NAdam, lr 0.001, 1800 epochs, minibatch 32, no dropout.
  static TrainConfig feature_defaults(std::uint64_t seed = 0);
  // Adam, lr 0.01, 200 epochs, full batch, dropout 0.5.
  static TrainConfig sequence_defaults(std::uint64_t seed = 0);

  TrainConfig with_epochs(int n) const {
    TrainConfig c = *this;
    c.epochs = n;
    return c;
  }

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainReport {
  std::vector<double> loss_history;  // full-training-set MSE after each epoch
  double train_seconds = 0.0;
  double final_train_mse = 0.0;
  double final_train_rmse = 0.0;
};

// {"loss_history": [...], "train_seconds": s, "final_train_mse": ..., ...}
nlohmann::json to_json(const TrainReport& report);
// "epoch,mse" header, epochs numbered from 1.
void write_loss_csv(const TrainReport& report, const std::filesystem::path& path);

struct FeatureTrainResult {
  FeatureAnnModel model;
  TrainReport report;
};

// Fits standardisation on the training inputs and trains the 3-64-64-1
// network on [s, c, g] -> RSSI.
FeatureTrainResult train_feature_model(const Dataset& train, const TrainConfig& cfg);

inline constexpr double kTrainFraction = 0.8;

struct SequenceTrainResult {
  SequenceAnnModel model;
  TrainReport report;
  WindowSplit split;  // raw windows; split.test is held out
};

// Chronological split, sliding windows of width `window`, then training of
// the window-64-1 network with dropout after the hidden layer.
SequenceTrainResult train_sequence_model(const SelectedSequence& seq,
                                         const TrainConfig& cfg, Index window = 1,
                                         double train_fraction = kTrainFraction);

enum class BaselineKind { Rnn, Lstm };

struct BaselineResult {
  AnyModel model;
  TrainReport report;
};

// Recurrent baseline on the feature dataset: each sample is a single step
// carrying [s, c, g].
BaselineResult train_baseline(BaselineKind kind, const Dataset& train,
                              const TrainConfig& cfg, Index hidden = kHiddenUnits);

struct SequenceBaselineResult {
  AnyModel model;
  TrainReport report;
  WindowSplit split;
};

// Recurrent baseline on a selected sequence, unrolled over `window` steps.
// Test targets coincide with train_sequence_model's for the same fraction.
SequenceBaselineResult train_baseline(BaselineKind kind, const SelectedSequence& seq,
                                      const TrainConfig& cfg, Index window,
                                      double train_fraction = kTrainFraction,
                                      Index hidden = kHiddenUnits);

// Lower level: recurrent training on raw (step_dim * window) x N inputs.
BaselineResult train_recurrent(BaselineKind kind, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets, Index step_dim,
                               Index window, const TrainConfig& cfg,
                               Index hidden = kHiddenUnits);

struct OlsTrainResult {
  OlsModel model;
  TrainReport report;  // single-entry history
};

OlsTrainResult train_ols(const Dataset& train);

}  // namespace rssi
