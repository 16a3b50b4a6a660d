#include "rssi/training/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

#include "rssi/data/standardize.hpp"
#include "rssi/error.hpp"
#include "rssi/format.hpp"
#include "rssi/numerics/dropout.hpp"
#include "rssi/numerics/loss.hpp"
#include "rssi/random.hpp"

namespace rssi {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValueError("train config: learning rate must be positive");
  }
  if (epochs < 1) throw ValueError("train config: epochs must be >= 1");
  check_dropout_rate(dropout_rate);
  if (batch.batch_size < 0) throw ValueError("train config: batch size must be >= 0");
}

TrainConfig TrainConfig::feature_defaults(std::uint64_t seed) {
  return {OptimizerKind::NAdam, 0.001, 1800, BatchPolicy::mini(32), 0.0, seed};
}

TrainConfig TrainConfig::sequence_defaults(std::uint64_t seed) {
  return {OptimizerKind::Adam, 0.01, 200, BatchPolicy::full(), kSequenceDropout, seed};
}

json to_json(const TrainConfig& cfg) {
  json batch = cfg.batch.is_full() ? json("full") : json(cfg.batch.batch_size);
  return {{"optimizer", to_string(cfg.optimizer)},
          {"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"batch", batch},
          {"dropout_rate", cfg.dropout_rate},
          {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  try {
    TrainConfig cfg;
    const auto opt = j.at("optimizer").get<std::string>();
    if (opt == "adam") {
      cfg.optimizer = OptimizerKind::Adam;
    } else if (opt == "nadam") {
      cfg.optimizer = OptimizerKind::NAdam;
    } else {
      throw FormatError("train config: unknown optimizer '" + opt + "'");
    }
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    const json& b = j.at("batch");
    cfg.batch = b.is_string() && b.get<std::string>() == "full"
                    ? BatchPolicy::full()
                    : BatchPolicy::mini(b.get<Index>());
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
}

json to_json(const TrainReport& r) {
  return {{"loss_history", r.loss_history},
          {"epochs", r.loss_history.size()},
          {"train_seconds", r.train_seconds},
          {"final_train_mse", r.final_train_mse},
          {"final_train_rmse", r.final_train_rmse}};
}

void write_loss_csv(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write loss history: " + path.string());
  out << "epoch,mse\n";
  for (std::size_t e = 0; e < report.loss_history.size(); ++e) {
    out << (e + 1) << ',' << format_double(report.loss_history[e]) << '\n';
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Flushes subnormals to zero for the guard's lifetime. Moment estimates of
// dead units decay into the subnormal range and stall the FPU otherwise.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | _MM_FLUSH_ZERO_ON | _MM_DENORMALS_ZERO_ON);
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned int saved_ = 0;
};

// Adapter over an MLP: dropout (if any) follows every hidden layer.
struct MlpTrainable {
  MlpNetwork<double>& net;
  double dropout_rate = 0.0;
  ForwardCache<double> cache;
  MlpGradients<double> grads;
  DropoutScales<double> dropout;

  Eigen::VectorXd parameters() const { return flatten_parameters(net); }
  void set_parameters(const Eigen::VectorXd& p) { assign_parameters(net, p); }

  void gradient(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                Eigen::VectorXd& flat_grad, Rng& rng) {
    const DropoutScales<double>* plan = nullptr;
    if (dropout_rate > 0.0) {
      dropout.assign(net.layers.size(), Eigen::MatrixXd());
      for (std::size_t t = 0; t + 1 < net.layers.size(); ++t) {
        dropout[t] = sample_dropout_scales<double>(net.layers[t].out_dim(), x.cols(),
                                                   dropout_rate, rng);
      }
      plan = &dropout;
    }
    const Eigen::MatrixXd out = mlp_forward_batch(net, x, &cache, plan);
    const Eigen::MatrixXd seed = (2.0 / static_cast<double>(x.cols())) * (out - y);
    mlp_backward_batch(net, cache, seed, grads);
    flatten_gradients(grads, flat_grad);
  }

  Eigen::RowVectorXd predict(const Eigen::MatrixXd& x) const { return mlp_predict(net, x); }
};

template <typename Net, typename Cache>
struct RecurrentTrainable {
  Net& net;
  Cache cache;
  Eigen::VectorXd block_grad;
  Eigen::VectorXd full_grad;

  // With one step the recurrent block only multiplies the zero initial state,
  // so its gradient is identically zero and an Adam-family update from zero
  // moments is exactly zero. The block is then kept out of the optimizer.
  bool inert_recurrent() const { return net.window == 1; }

  void compact(const Eigen::VectorXd& full, Eigen::VectorXd& out) const {
    if (!inert_recurrent()) {
      out = full;
      return;
    }
    const Index head = net.w_input.size();
    const Index tail = full.size() - head - net.w_recurrent.size();
    out.resize(head + tail);
    out.head(head) = full.head(head);
    out.tail(tail) = full.tail(tail);
  }

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd p;
    compact(flatten_recurrent(net), p);
    return p;
  }

  void set_parameters(const Eigen::VectorXd& p) {
    if (!inert_recurrent()) {
      assign_recurrent(net, p);
      return;
    }
    if (p.size() != parameter_count(net) - net.w_recurrent.size()) {
      throw ShapeError("set_parameters: wrong trainable parameter count");
    }
    Index off = 0;
    auto take = [&](auto& m) {
      m.reshaped() = p.segment(off, m.size());
      off += m.size();
    };
    take(net.w_input);
    take(net.bias);
    take(net.readout);
    net.readout_bias = p[off];
  }

  static constexpr Index kBlock = 512;

  Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) {
    if constexpr (std::is_same_v<Net, RnnNetwork<double>>) {
      return rnn_forward(net, x, &cache);
    } else {
      return lstm_forward(net, x, &cache);
    }
  }

  void backward(const Eigen::RowVectorXd& g, Eigen::VectorXd& flat) {
    if constexpr (std::is_same_v<Net, RnnNetwork<double>>) {
      rnn_backward(net, cache, g, flat);
    } else {
      lstm_backward(net, cache, g, flat);
    }
  }

  // Summed over column blocks so large batches stay in cache.
  void gradient(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                Eigen::VectorXd& flat_grad, Rng&) {
    const double scale = 2.0 / static_cast<double>(x.cols());
    if (x.cols() <= kBlock) {
      const Eigen::RowVectorXd out = forward(x);
      backward(Eigen::RowVectorXd(scale * (out - y)), full_grad);
    } else {
      full_grad.setZero(parameter_count(net));
      for (Index s = 0; s < x.cols(); s += kBlock) {
        const Index n = std::min(kBlock, x.cols() - s);
        const Eigen::MatrixXd block = x.middleCols(s, n);
        const Eigen::RowVectorXd out = forward(block);
        backward(Eigen::RowVectorXd(scale * (out - y.segment(s, n))), block_grad);
        full_grad += block_grad;
      }
    }
    compact(full_grad, flat_grad);
  }

  Eigen::RowVectorXd predict(const Eigen::MatrixXd& x) {
    Eigen::RowVectorXd out(x.cols());
    for (Index s = 0; s < x.cols(); s += kBlock) {
      const Index n = std::min(kBlock, x.cols() - s);
      out.segment(s, n) = forward(x.middleCols(s, n).eval());
    }
    return out;
  }
};

// Shared epoch loop. `x` is already standardised; the model starts from its
// current parameters. Each epoch ends with a full-training-set MSE.
template <typename Trainable>
TrainReport run_training(Trainable& model, const Eigen::MatrixXd& x,
                         const Eigen::RowVectorXd& y, const TrainConfig& cfg) {
  cfg.validate();
  const Index n = x.cols();
  if (n == 0) throw ValueError("training: empty training set");
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  Eigen::VectorXd params = model.parameters();
  Eigen::VectorXd grad(params.size());
  OptimizerState<double> state(params.size());
  const Index batch = cfg.batch.is_full() ? n : std::min(cfg.batch.batch_size, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Eigen::MatrixXd xb;
  Eigen::RowVectorXd yb;

  TrainReport report;
  report.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  const FlushDenormals ftz;
  const auto start = Clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    try {
      if (batch == n) {
        model.gradient(x, y, grad, dropout_rng);
        optimizer_step(cfg.optimizer, params, grad, state, cfg.learning_rate);
        model.set_parameters(params);
      } else {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (Index s = 0; s < n; s += batch) {
          const Index m = std::min(batch, n - s);
          const auto first = order.begin() + s;
          const std::vector<Index> idx(first, first + m);
          xb = x(Eigen::all, idx);
          yb = y(Eigen::all, idx);
          model.gradient(xb, yb, grad, dropout_rng);
          optimizer_step(cfg.optimizer, params, grad, state, cfg.learning_rate);
          model.set_parameters(params);
        }
      }
    } catch (const NumericalError& e) {
      throw NumericalError("training diverged in epoch " + std::to_string(epoch + 1) +
                           ": " + e.what());
    }
    const double epoch_mse = mse(model.predict(x), y);
    if (!std::isfinite(epoch_mse)) {
      throw NumericalError("training diverged in epoch " + std::to_string(epoch + 1) +
                           ": loss is not finite");
    }
    report.loss_history.push_back(epoch_mse);
  }
  report.train_seconds = seconds_since(start);
  report.final_train_mse = report.loss_history.back();
  report.final_train_rmse = rmse(report.final_train_mse);
  return report;
}

}  // namespace

FeatureTrainResult train_feature_model(const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw ValueError("train_feature_model: empty training set");
  const Eigen::MatrixXd raw = feature_matrix(train);
  const Eigen::RowVectorXd y = rssi_vector(train).transpose();

  FeatureTrainResult result;
  result.model.input_stats = standardize_fit(raw);
  result.model.net = build_feature_ann(derive_seed(cfg.seed, "init"));
  result.model.net.layers.back().biases.setConstant(y.mean());
  const Eigen::MatrixXd x = standardize_apply(result.model.input_stats, raw);

  MlpTrainable trainable{result.model.net, cfg.dropout_rate, {}, {}, {}};
  result.report = run_training(trainable, x, y, cfg);
  return result;
}

SequenceTrainResult train_sequence_model(const SelectedSequence& seq,
                                         const TrainConfig& cfg, Index window,
                                         double train_fraction) {
  cfg.validate();
  SequenceTrainResult result;
  result.split = make_split_windows(seq.rssi, train_fraction, window);
  const Windows& tr = result.split.train;

  auto spec = build_sequence_ann(window, derive_seed(cfg.seed, "init"));
  result.model.net = std::move(spec.net);
  result.model.dropout_rate = cfg.dropout_rate;
  result.model.input_stats = standardize_fit(tr.inputs);
  result.model.net.layers.back().biases.setConstant(tr.targets.mean());
  const Eigen::MatrixXd x = standardize_apply(result.model.input_stats, tr.inputs);

  MlpTrainable trainable{result.model.net, cfg.dropout_rate, {}, {}, {}};
  result.report = run_training(trainable, x, tr.targets.transpose(), cfg);
  return result;
}

BaselineResult train_recurrent(BaselineKind kind, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets, Index step_dim,
                               Index window, const TrainConfig& cfg, Index hidden) {
  cfg.validate();
  if (inputs.cols() != targets.size()) {
    throw ShapeError("train_recurrent: " + std::to_string(inputs.cols()) +
                     " samples vs " + std::to_string(targets.size()) + " targets");
  }
  if (inputs.rows() != step_dim * window) {
    throw ShapeError("train_recurrent: inputs have " + std::to_string(inputs.rows()) +
                     " rows, expected " + std::to_string(step_dim * window));
  }
  if (cfg.dropout_rate > 0.0) {
    throw ValueError("train_recurrent: recurrent baselines do not use dropout");
  }
  const auto stats = standardize_fit(inputs);
  const Eigen::MatrixXd x = standardize_apply(stats, inputs);
  const Eigen::RowVectorXd y = targets.transpose();
  Rng init_rng(derive_seed(cfg.seed, "init"));

  BaselineResult result;
  if (kind == BaselineKind::Rnn) {
    RnnModel m{init_rnn<double>(step_dim, hidden, window, init_rng), stats};
    m.net.readout_bias = targets.mean();
    RecurrentTrainable<RnnNetwork<double>, RnnCache<double>> t{m.net, {}, {}, {}};
    result.report = run_training(t, x, y, cfg);
    result.model = std::move(m);
  } else {
    LstmModel m{init_lstm<double>(step_dim, hidden, window, init_rng), stats};
    m.net.readout_bias = targets.mean();
    RecurrentTrainable<LstmNetwork<double>, LstmCache<double>> t{m.net, {}, {}, {}};
    result.report = run_training(t, x, y, cfg);
    result.model = std::move(m);
  }
  return result;
}

BaselineResult train_baseline(BaselineKind kind, const Dataset& train,
                              const TrainConfig& cfg, Index hidden) {
  if (train.empty()) throw ValueError("train_baseline: empty training set");
  return train_recurrent(kind, feature_matrix(train), rssi_vector(train),
                         kFeatureInputs, 1, cfg, hidden);
}

SequenceBaselineResult train_baseline(BaselineKind kind, const SelectedSequence& seq,
                                      const TrainConfig& cfg, Index window,
                                      double train_fraction, Index hidden) {
  SequenceBaselineResult result;
  result.split = make_split_windows(seq.rssi, train_fraction, window);
  auto fitted = train_recurrent(kind, result.split.train.inputs,
                                result.split.train.targets, 1, window, cfg, hidden);
  result.model = std::move(fitted.model);
  result.report = std::move(fitted.report);
  return result;
}

OlsTrainResult train_ols(const Dataset& train) {
  const Eigen::MatrixXd x = feature_matrix(train);
  const Eigen::VectorXd y = rssi_vector(train);
  const auto start = Clock::now();
  OlsTrainResult result;
  result.model = ols_fit(x, y);
  const double train_mse = mse(predict(result.model, x), y);
  result.report.train_seconds = seconds_since(start);
  result.report.loss_history = {train_mse};
  result.report.final_train_mse = train_mse;
  result.report.final_train_rmse = rmse(train_mse);
  return result;
}

}  // namespace rssi
