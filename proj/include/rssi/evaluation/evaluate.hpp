#pragma once

#include "json.hpp"
#include "rssi/models/models.hpp"

namespace rssi {

struct EvalMetrics {
  double mse = 0.0;           // dBm^2
  double rmse = 0.0;          // dBm
  double test_seconds = 0.0;  // prediction only
};

nlohmann::json to_json(const EvalMetrics& m);

// Predicts every column of `inputs` and scores against `targets`. The model
// is taken by const reference and never modified.
EvalMetrics evaluate(const AnyModel& model, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets);

// 100 * (reference - ours) / reference; positive when ours is lower.
double improvement_pct(double reference_mse, double our_mse);

inline constexpr double kDefaultReferenceMse = 45.25;

}  // namespace rssi
