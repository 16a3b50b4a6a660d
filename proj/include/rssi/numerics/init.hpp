#pragma once

#include <cmath>
#include <random>

#include "rssi/error.hpp"
#include "rssi/numerics/dense.hpp"
#include "rssi/random.hpp"

namespace rssi {

// He-normal weights: entries ~ N(0, 2 / fan_in), filled column-major.
template <typename Scalar>
MatrixX<Scalar> he_init(Index rows, Index fan_in, Rng& rng) {
  if (fan_in <= 0) throw ValueError("he_init: fan_in must be positive");
  if (rows <= 0) throw ValueError("he_init: rows must be positive");
  std::normal_distribution<double> dist(
      0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  MatrixX<Scalar> w(rows, fan_in);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  return w;
}

template <typename Scalar>
DenseLayer<Scalar> he_dense_layer(Index in_dim, Index out_dim, Activation act,
                                  Rng& rng) {
  return DenseLayer<Scalar>{he_init<Scalar>(out_dim, in_dim, rng),
                            VectorX<Scalar>::Zero(out_dim), act};
}

}  // namespace rssi
