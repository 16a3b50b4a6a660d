#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rssi/data/dataset.hpp"
#include "rssi/data/standardize.hpp"
#include "rssi/models/recurrent.hpp"
#include "rssi/numerics/dense.hpp"

namespace rssi {

enum class ModelKind { FeatureAnn, SequenceAnn, Ols, Rnn, Lstm };

// "feature", "sequence", "ols", "rnn", "lstm".
std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline constexpr Index kHiddenUnits = 64;
inline constexpr Index kFeatureInputs = 3;
inline constexpr double kSequenceDropout = 0.5;

// 3 -> 64 ReLU -> 64 ReLU -> 1 linear, He-initialised.
MlpNetwork<double> build_feature_ann(std::uint64_t seed);

// W -> 64 ReLU (dropout after this layer) -> 1 linear.
struct SequenceAnnSpec {
  MlpNetwork<double> net;
  double dropout_rate = kSequenceDropout;
};
SequenceAnnSpec build_sequence_ann(Index window, std::uint64_t seed);

// Every trained estimator maps raw inputs (features x samples) to dBm and
// carries its own input standardisation.
struct FeatureAnnModel {
  MlpNetwork<double> net;
  StandardizationStats<double> input_stats;
};

struct SequenceAnnModel {
  MlpNetwork<double> net;
  double dropout_rate = kSequenceDropout;
  StandardizationStats<double> input_stats;

  Index window() const { return net.input_dim; }
};

// Least squares on [s, c, [g==1], [g==2]] plus intercept.
struct OlsModel {
  Eigen::VectorXd coefficients;  // 4
  double intercept = 0.0;
};

struct RnnModel {
  RnnNetwork<double> net;
  StandardizationStats<double> input_stats;
};

struct LstmModel {
  LstmNetwork<double> net;
  StandardizationStats<double> input_stats;
};

using AnyModel =
    std::variant<FeatureAnnModel, SequenceAnnModel, OlsModel, RnnModel, LstmModel>;

ModelKind kind_of(const AnyModel& model);

// Rows of the raw input matrix each model consumes.
Index input_rows(const FeatureAnnModel& m);
Index input_rows(const SequenceAnnModel& m);
Index input_rows(const OlsModel& m);
Index input_rows(const RnnModel& m);
Index input_rows(const LstmModel& m);
Index input_rows(const AnyModel& m);

// Inference (dropout off). Inputs are raw, one sample per column.
Eigen::VectorXd predict(const FeatureAnnModel& m, const Eigen::MatrixXd& inputs);
Eigen::VectorXd predict(const SequenceAnnModel& m, const Eigen::MatrixXd& inputs);
Eigen::VectorXd predict(const OlsModel& m, const Eigen::MatrixXd& inputs);
Eigen::VectorXd predict(const RnnModel& m, const Eigen::MatrixXd& inputs);
Eigen::VectorXd predict(const LstmModel& m, const Eigen::MatrixXd& inputs);
Eigen::VectorXd predict(const AnyModel& m, const Eigen::MatrixXd& inputs);

Index parameter_count(const AnyModel& m);

// OLS design matrix: one row per sample, columns s, c, [g==1], [g==2].
Eigen::MatrixXd ols_design(const Eigen::MatrixXd& feature_inputs);

inline constexpr double kOlsRidge = 1e-8;

// Normal equations (X'X + ridge I) beta = X'y over the design with an
// intercept column. Throws ValueError with fewer than 5 samples and
// NumericalError when every design row is identical.
OlsModel ols_fit(const std::vector<FeatureTriple>& inputs,
                 const Eigen::VectorXd& targets);
OlsModel ols_fit(const Eigen::MatrixXd& feature_inputs,
                 const Eigen::VectorXd& targets);

// Batched MLP inference in cache-sized column blocks.
Eigen::RowVectorXd mlp_predict(const MlpNetwork<double>& net,
                               const Eigen::MatrixXd& inputs);

}  // namespace rssi
