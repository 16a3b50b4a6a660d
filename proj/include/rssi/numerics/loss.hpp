#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "rssi/error.hpp"

namespace rssi {

// Mean squared error in dBm^2.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse(const Eigen::MatrixBase<DerivedA>& predictions,
                              const Eigen::MatrixBase<DerivedB>& targets) {
  if (predictions.size() != targets.size()) {
    throw ShapeError("mse: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(targets.size()) +
                     " targets");
  }
  if (predictions.size() == 0) throw ValueError("mse: empty input");
  using Scalar = typename DerivedA::Scalar;
  // reshaped() lets row and column vectors mix.
  const Scalar sum =
      (predictions.reshaped() - targets.reshaped()).squaredNorm();
  return sum / static_cast<Scalar>(predictions.size());
}

template <typename Scalar>
Scalar rmse(Scalar mse_value) {
  if (!(mse_value >= Scalar(0))) {
    throw ValueError("rmse: mse must be non-negative, got " +
                     std::to_string(static_cast<double>(mse_value)));
  }
  using std::sqrt;
  return sqrt(mse_value);
}

}  // namespace rssi
