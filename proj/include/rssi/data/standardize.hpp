#pragma once

#include <Eigen/Dense>

#include <string>

#include "rssi/error.hpp"

namespace rssi {

// Per-feature (row) mean and population standard deviation of a training
// matrix laid out features x samples.
template <typename Scalar>
struct StandardizationStats {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stddev;

  Eigen::Index dim() const { return mean.size(); }

  static StandardizationStats identity(Eigen::Index dim) {
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(dim),
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(dim)};
  }
};

// A feature with zero spread keeps its mean and gets std 1, so it is centred
// but not scaled.
template <typename Derived>
StandardizationStats<typename Derived::Scalar> standardize_fit(
    const Eigen::MatrixBase<Derived>& train_inputs) {
  using Scalar = typename Derived::Scalar;
  if (train_inputs.cols() == 0 || train_inputs.rows() == 0) {
    throw ValueError("standardize_fit: empty training set");
  }
  const auto n = static_cast<Scalar>(train_inputs.cols());
  StandardizationStats<Scalar> s;
  s.mean = train_inputs.rowwise().sum() / n;
  s.stddev = ((train_inputs.colwise() - s.mean).rowwise().squaredNorm() / n)
                 .cwiseSqrt();
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    if (!(s.stddev[i] > Scalar(0))) s.stddev[i] = Scalar(1);
  }
  return s;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> standardize_apply(
    const StandardizationStats<Scalar>& stats,
    const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != stats.dim()) {
    throw ShapeError("standardize_apply: input has " + std::to_string(x.rows()) +
                     " features, stats cover " + std::to_string(stats.dim()));
  }
  return (x.colwise() - stats.mean).array().colwise() / stats.stddev.array();
}

}  // namespace rssi
