#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>
#include <random>

#include "rssi/data/sequence.hpp"
#include "rssi/data/synthetic.hpp"
#include "rssi/error.hpp"
#include "rssi/training/train.hpp"

namespace rssi {
namespace {

Dataset small_dataset(double sigma, std::uint64_t seed = 3) {
  SyntheticConfig cfg;
  cfg.scenario1_samples = 60;
  cfg.samples_per_cell_min = cfg.samples_per_cell_max = 6;
  cfg.sigma_los_db = cfg.sigma_nlos_db = sigma;
  return generate_synthetic(cfg, seed);
}

TrainConfig quick(int epochs) {
  TrainConfig cfg = TrainConfig::feature_defaults(5);
  cfg.epochs = epochs;
  cfg.learning_rate = 0.01;
  return cfg;
}

TEST(TrainConfig, DefaultsAndValidation) {
  const auto f = TrainConfig::feature_defaults();
  EXPECT_EQ(f.optimizer, OptimizerKind::NAdam);
  EXPECT_DOUBLE_EQ(f.learning_rate, 0.001);
  EXPECT_EQ(f.epochs, 1800);
  EXPECT_EQ(f.batch.batch_size, 32);
  const auto s = TrainConfig::sequence_defaults();
  EXPECT_EQ(s.optimizer, OptimizerKind::Adam);
  EXPECT_DOUBLE_EQ(s.learning_rate, 0.01);
  EXPECT_EQ(s.epochs, 200);
  EXPECT_TRUE(s.batch.is_full());
  EXPECT_DOUBLE_EQ(s.dropout_rate, 0.5);

  TrainConfig bad = f;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ValueError);
  bad = f;
  bad.learning_rate = -1;
  EXPECT_THROW(bad.validate(), ValueError);
  bad = f;
  bad.dropout_rate = 1.0;
  EXPECT_THROW(bad.validate(), ValueError);
  EXPECT_THROW(train_feature_model(small_dataset(1.0), bad), ValueError);
}

TEST(TrainConfig, JsonRoundTrip) {
  for (const auto& cfg : {TrainConfig::feature_defaults(17), TrainConfig::sequence_defaults(4)}) {
    EXPECT_EQ(train_config_from_json(to_json(cfg)), cfg);
  }
  auto j = to_json(TrainConfig{});
  j["optimizer"] = "sgd";
  EXPECT_THROW(train_config_from_json(j), FormatError);
}

TEST(FeatureTraining, HistoryLengthAndDeterminism) {
  const Dataset ds = small_dataset(1.0);
  const auto a = train_feature_model(ds, quick(12));
  const auto b = train_feature_model(ds, quick(12));
  ASSERT_EQ(a.report.loss_history.size(), 12u);
  EXPECT_EQ(a.report.loss_history, b.report.loss_history);
  EXPECT_EQ(flatten_parameters(a.model.net), flatten_parameters(b.model.net));
  EXPECT_EQ(a.report.final_train_mse, a.report.loss_history.back());
  EXPECT_DOUBLE_EQ(a.report.final_train_rmse, std::sqrt(a.report.final_train_mse));
  EXPECT_GE(a.report.train_seconds, 0.0);
  auto other = quick(12);
  other.seed = 6;
  EXPECT_NE(train_feature_model(ds, other).report.loss_history, a.report.loss_history);
}

TEST(FeatureTraining, LossDecreasesOnNoiselessData) {
  const Dataset ds = small_dataset(0.0);
  const auto r = train_feature_model(ds, TrainConfig::feature_defaults(5).with_epochs(300));
  const auto& h = r.report.loss_history;
  EXPECT_LT(h.back(), 0.1 * h.front());
  // 50-epoch moving average, sampled every 50 epochs, is non-increasing.
  auto avg = [&](std::size_t end) {
    double s = 0;
    for (std::size_t i = end - 50; i < end; ++i) s += h[i];
    return s / 50.0;
  };
  for (std::size_t e = 100; e <= h.size(); e += 50) EXPECT_LE(avg(e), avg(e - 50)) << "epoch " << e;
}

TEST(FeatureTraining, EmptyDatasetRejected) {
  EXPECT_THROW(train_feature_model(Dataset{}, quick(1)), ValueError);
}

TEST(FeatureTraining, DivergenceNamesTheEpoch) {
  TrainConfig cfg = quick(50);
  cfg.learning_rate = 1e200;
  try {
    train_feature_model(small_dataset(1.0), cfg);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(SequenceTraining, NoiselessConstantCellIsLearned) {
  SelectedSequence seq{{3.0, 0, 0}, Eigen::VectorXd::Constant(200, -64.0)};
  const auto r = train_sequence_model(seq, TrainConfig::sequence_defaults(1));
  EXPECT_EQ(r.report.loss_history.size(), 200u);
  const Eigen::VectorXd p = predict(r.model, r.split.test.inputs);
  EXPECT_LE((p - r.split.test.targets).squaredNorm() / static_cast<double>(p.size()), 0.01);
}

TEST(SequenceTraining, InferenceIsDeterministic) {
  Rng rng(0);
  std::normal_distribution<double> n(-60.0, 2.0);
  Eigen::VectorXd v(150);
  for (auto& x : v) x = n(rng);
  const auto r = train_sequence_model({{1.0, 0, 2}, v}, TrainConfig::sequence_defaults(2));
  const Eigen::VectorXd a = predict(r.model, r.split.test.inputs);
  const Eigen::VectorXd b = predict(r.model, r.split.test.inputs);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
}

TEST(SequenceTraining, WindowedInputs) {
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(100, -70, -50);
  TrainConfig cfg = TrainConfig::sequence_defaults(0);
  cfg.epochs = 5;
  const auto r = train_sequence_model({{1.0, 0, 2}, v}, cfg, 4);
  EXPECT_EQ(r.model.window(), 4);
  EXPECT_EQ(r.split.test.inputs.rows(), 4);
}

TEST(BaselineTraining, RecurrentOnFeaturesAndSequences) {
  const Dataset ds = small_dataset(1.0);
  auto cfg = quick(3);
  const auto rnn = train_baseline(BaselineKind::Rnn, ds, cfg, 8);
  EXPECT_EQ(kind_of(rnn.model), ModelKind::Rnn);
  EXPECT_EQ(rnn.report.loss_history.size(), 3u);
  const auto again = train_baseline(BaselineKind::Rnn, ds, cfg, 8);
  EXPECT_EQ(rnn.report.loss_history, again.report.loss_history);

  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(80, -70, -50);
  TrainConfig scfg = TrainConfig::sequence_defaults(0);
  scfg.dropout_rate = 0.0;
  scfg.epochs = 4;
  const auto lstm = train_baseline(BaselineKind::Lstm, SelectedSequence{{1.0, 0, 2}, v}, scfg, 5,
                                   kTrainFraction, 6);
  EXPECT_EQ(kind_of(lstm.model), ModelKind::Lstm);
  EXPECT_EQ(input_rows(lstm.model), 5);
  EXPECT_EQ(lstm.split.test.count(), 16);
  scfg.dropout_rate = 0.5;
  EXPECT_THROW(train_baseline(BaselineKind::Lstm, SelectedSequence{{1.0, 0, 2}, v}, scfg, 5),
               ValueError);
}

TEST(OlsTraining, SingleEntryHistory) {
  const auto r = train_ols(small_dataset(0.5));
  EXPECT_EQ(r.report.loss_history.size(), 1u);
  EXPECT_GE(r.report.final_train_mse, 0.0);
}

TEST(TrainReport, LossCsvAndJson) {
  TrainReport r;
  r.loss_history = {3.5, 1.25};
  r.final_train_mse = 1.25;
  r.final_train_rmse = std::sqrt(1.25);
  const auto path = std::filesystem::temp_directory_path() / "rssi_loss_test.csv";
  write_loss_csv(r, path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "epoch,mse\n1,3.5\n2,1.25\n");
  std::filesystem::remove(path);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("loss_history").size(), 2u);
  EXPECT_EQ(j.at("final_train_mse").get<double>(), 1.25);
}

}  // namespace
}  // namespace rssi
