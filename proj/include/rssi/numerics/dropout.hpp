#pragma once

#include <random>
#include <string>

#include "rssi/error.hpp"
#include "rssi/numerics/dense.hpp"
#include "rssi/random.hpp"

namespace rssi {

enum class Phase { Training, Inference };

// Inverted dropout: kept units are scaled by 1/(1-rate) at training time so
// inference is a plain pass-through.
struct DropoutMask {
  Eigen::Array<bool, Eigen::Dynamic, 1> keep;
  double rate = 0.0;

  double scale() const { return 1.0 / (1.0 - rate); }

  template <typename Scalar>
  VectorX<Scalar> apply(const VectorX<Scalar>& x, Phase phase) const {
    if (phase == Phase::Inference) return x;
    if (x.size() != keep.size()) {
      throw ShapeError("dropout: mask width " + std::to_string(keep.size()) +
                       " vs activations " + std::to_string(x.size()));
    }
    const auto s = static_cast<Scalar>(scale());
    return keep.select(x * s, VectorX<Scalar>::Zero(x.size()));
  }
};

inline void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValueError("dropout rate must lie in [0, 1), got " +
                     std::to_string(rate));
  }
}

inline DropoutMask sample_dropout_mask(Index dim, double rate, Rng& rng) {
  check_dropout_rate(rate);
  std::bernoulli_distribution keep(1.0 - rate);
  DropoutMask mask;
  mask.rate = rate;
  mask.keep.resize(dim);
  for (Index i = 0; i < dim; ++i) mask.keep[i] = keep(rng);
  return mask;
}

// Batch form: an independent mask per column, materialised as the scale
// factors (0 or 1/(1-rate)) that mlp_forward_batch multiplies in.
template <typename Scalar>
MatrixX<Scalar> sample_dropout_scales(Index rows, Index cols, double rate,
                                      Rng& rng) {
  check_dropout_rate(rate);
  std::bernoulli_distribution keep(1.0 - rate);
  const auto s = static_cast<Scalar>(1.0 / (1.0 - rate));
  MatrixX<Scalar> out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = keep(rng) ? s : Scalar(0);
  return out;
}

}  // namespace rssi
