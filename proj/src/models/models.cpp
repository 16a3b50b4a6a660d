#include "rssi/models/models.hpp"

#include <algorithm>
#include <string>

#include "rssi/error.hpp"
#include "rssi/numerics/init.hpp"
#include "rssi/random.hpp"

namespace rssi {
namespace {

constexpr Index kPredictBlock = 512;

template <typename Forward>
Eigen::VectorXd blocked(const Eigen::MatrixXd& x, Forward&& forward) {
  Eigen::VectorXd out(x.cols());
  for (Index start = 0; start < x.cols(); start += kPredictBlock) {
    const Index n = std::min(kPredictBlock, x.cols() - start);
    const Eigen::MatrixXd block = x.middleCols(start, n);
    out.segment(start, n) = forward(block).transpose();
  }
  return out;
}

void check_rows(Index got, Index expected, const char* who) {
  if (got != expected) {
    throw ShapeError(std::string(who) + ": input has " + std::to_string(got) +
                     " rows, model expects " + std::to_string(expected));
  }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::FeatureAnn:
      return "feature";
    case ModelKind::SequenceAnn:
      return "sequence";
    case ModelKind::Ols:
      return "ols";
    case ModelKind::Rnn:
      return "rnn";
    case ModelKind::Lstm:
      return "lstm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::FeatureAnn, ModelKind::SequenceAnn, ModelKind::Ols,
                 ModelKind::Rnn, ModelKind::Lstm}) {
    if (model_kind_name(k) == name) return k;
  }
  throw ValueError("unknown model kind '" + std::string(name) + "'");
}

MlpNetwork<double> build_feature_ann(std::uint64_t seed) {
  Rng rng(seed);
  MlpNetwork<double> net;
  net.input_dim = kFeatureInputs;
  net.layers.push_back(
      he_dense_layer<double>(kFeatureInputs, kHiddenUnits, Activation::ReLU, rng));
  net.layers.push_back(
      he_dense_layer<double>(kHiddenUnits, kHiddenUnits, Activation::ReLU, rng));
  net.layers.push_back(
      he_dense_layer<double>(kHiddenUnits, 1, Activation::Linear, rng));
  return net;
}

SequenceAnnSpec build_sequence_ann(Index window, std::uint64_t seed) {
  if (window < 1) throw ValueError("build_sequence_ann: window must be >= 1");
  Rng rng(seed);
  SequenceAnnSpec spec;
  spec.net.input_dim = window;
  spec.net.layers.push_back(
      he_dense_layer<double>(window, kHiddenUnits, Activation::ReLU, rng));
  spec.net.layers.push_back(
      he_dense_layer<double>(kHiddenUnits, 1, Activation::Linear, rng));
  return spec;
}

ModelKind kind_of(const AnyModel& model) {
  return static_cast<ModelKind>(model.index());
}

Index input_rows(const FeatureAnnModel& m) { return m.net.input_dim; }
Index input_rows(const SequenceAnnModel& m) { return m.net.input_dim; }
Index input_rows(const OlsModel&) { return kFeatureInputs; }
Index input_rows(const RnnModel& m) { return m.net.input_rows(); }
Index input_rows(const LstmModel& m) { return m.net.input_rows(); }
Index input_rows(const AnyModel& m) {
  return std::visit([](const auto& x) { return input_rows(x); }, m);
}

Eigen::RowVectorXd mlp_predict(const MlpNetwork<double>& net,
                               const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), net.input_dim, "predict");
  ForwardCache<double> scratch;
  return blocked(inputs, [&](const Eigen::MatrixXd& block) {
           return Eigen::RowVectorXd(mlp_forward_batch(net, block, &scratch));
         })
      .transpose();
}

Eigen::VectorXd predict(const FeatureAnnModel& m, const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), input_rows(m), "predict(feature)");
  return mlp_predict(m.net, standardize_apply(m.input_stats, inputs)).transpose();
}

Eigen::VectorXd predict(const SequenceAnnModel& m, const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), input_rows(m), "predict(sequence)");
  return mlp_predict(m.net, standardize_apply(m.input_stats, inputs)).transpose();
}

Eigen::MatrixXd ols_design(const Eigen::MatrixXd& feature_inputs) {
  check_rows(feature_inputs.rows(), kFeatureInputs, "ols_design");
  Eigen::MatrixXd x(feature_inputs.cols(), 4);
  for (Index i = 0; i < feature_inputs.cols(); ++i) {
    const double g = feature_inputs(2, i);
    x(i, 0) = feature_inputs(0, i);
    x(i, 1) = feature_inputs(1, i);
    x(i, 2) = g == 1.0 ? 1.0 : 0.0;
    x(i, 3) = g == 2.0 ? 1.0 : 0.0;
  }
  return x;
}

Eigen::VectorXd predict(const OlsModel& m, const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), kFeatureInputs, "predict(ols)");
  if (m.coefficients.size() != 4) {
    throw ShapeError("predict(ols): model has " +
                     std::to_string(m.coefficients.size()) +
                     " coefficients, design has 4 columns");
  }
  Eigen::VectorXd y = ols_design(inputs) * m.coefficients;
  y.array() += m.intercept;
  return y;
}

Eigen::VectorXd predict(const RnnModel& m, const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), input_rows(m), "predict(rnn)");
  const Eigen::MatrixXd x = standardize_apply(m.input_stats, inputs);
  RnnCache<double> scratch;
  return blocked(x, [&](const Eigen::MatrixXd& block) {
    return rnn_forward(m.net, block, &scratch);
  });
}

Eigen::VectorXd predict(const LstmModel& m, const Eigen::MatrixXd& inputs) {
  check_rows(inputs.rows(), input_rows(m), "predict(lstm)");
  const Eigen::MatrixXd x = standardize_apply(m.input_stats, inputs);
  LstmCache<double> scratch;
  return blocked(x, [&](const Eigen::MatrixXd& block) {
    return lstm_forward(m.net, block, &scratch);
  });
}

Eigen::VectorXd predict(const AnyModel& m, const Eigen::MatrixXd& inputs) {
  return std::visit([&](const auto& x) { return predict(x, inputs); }, m);
}

Index parameter_count(const AnyModel& m) {
  struct Counter {
    Index operator()(const FeatureAnnModel& x) const { return parameter_count(x.net); }
    Index operator()(const SequenceAnnModel& x) const { return parameter_count(x.net); }
    Index operator()(const OlsModel& x) const { return x.coefficients.size() + 1; }
    Index operator()(const RnnModel& x) const { return parameter_count(x.net); }
    Index operator()(const LstmModel& x) const { return parameter_count(x.net); }
  };
  return std::visit(Counter{}, m);
}

OlsModel ols_fit(const Eigen::MatrixXd& feature_inputs,
                 const Eigen::VectorXd& targets) {
  if (feature_inputs.cols() != targets.size()) {
    throw ShapeError("ols_fit: " + std::to_string(feature_inputs.cols()) +
                     " samples vs " + std::to_string(targets.size()) + " targets");
  }
  const Eigen::MatrixXd design = ols_design(feature_inputs);
  const Index width = design.cols();
  if (design.rows() < width + 1) {
    throw ValueError("ols_fit: need at least " + std::to_string(width + 1) +
                     " samples, got " + std::to_string(design.rows()));
  }
  if (!targets.allFinite()) throw ValueError("ols_fit: non-finite target");
  const bool identical_rows =
      (design.rowwise() - design.row(0)).cwiseAbs().maxCoeff() == 0.0;
  if (identical_rows) {
    throw NumericalError("ols_fit: singular design, every sample has the same features");
  }

  Eigen::MatrixXd a(design.rows(), width + 1);
  a << design, Eigen::VectorXd::Ones(design.rows());
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += kOlsRidge;
  const Eigen::VectorXd beta = gram.ldlt().solve(a.transpose() * targets);
  if (!beta.allFinite()) throw NumericalError("ols_fit: solve produced non-finite values");
  return {beta.head(width), beta[width]};
}

OlsModel ols_fit(const std::vector<FeatureTriple>& inputs,
                 const Eigen::VectorXd& targets) {
  Eigen::MatrixXd x(kFeatureInputs, static_cast<Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    x.col(static_cast<Index>(i)) << inputs[i].s, inputs[i].c, inputs[i].g;
  }
  return ols_fit(x, targets);
}

}  // namespace rssi
