#include "rssi/evaluation/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "rssi/error.hpp"
#include "rssi/numerics/loss.hpp"

namespace rssi {

nlohmann::json to_json(const EvalMetrics& m) {
  return {{"mse", m.mse}, {"rmse", m.rmse}, {"test_seconds", m.test_seconds}};
}

EvalMetrics evaluate(const AnyModel& model, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets) {
  if (targets.size() == 0) throw ValueError("evaluate: empty test set");
  if (inputs.cols() != targets.size()) {
    throw ShapeError("evaluate: " + std::to_string(inputs.cols()) + " samples vs " +
                     std::to_string(targets.size()) + " targets");
  }
  if (inputs.rows() != input_rows(model)) {
    throw ShapeError("evaluate: inputs have " + std::to_string(inputs.rows()) +
                     " rows, " + std::string(model_kind_name(kind_of(model))) +
                     " model expects " + std::to_string(input_rows(model)));
  }
  const auto start = std::chrono::steady_clock::now();
  const Eigen::VectorXd predictions = predict(model, inputs);
  const auto stop = std::chrono::steady_clock::now();

  EvalMetrics m;
  m.mse = mse(predictions, targets);
  if (!std::isfinite(m.mse)) throw NumericalError("evaluate: non-finite prediction error");
  m.rmse = rmse(m.mse);
  m.test_seconds = std::chrono::duration<double>(stop - start).count();
  return m;
}

double improvement_pct(double reference_mse, double our_mse) {
  if (!(reference_mse > 0.0) || !std::isfinite(reference_mse)) {
    throw ValueError("improvement_pct: reference MSE must be positive");
  }
  if (!std::isfinite(our_mse)) throw ValueError("improvement_pct: MSE must be finite");
  return 100.0 * (reference_mse - our_mse) / reference_mse;
}

}  // namespace rssi
