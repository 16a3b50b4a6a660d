#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>

#include "rssi/error.hpp"
#include "rssi/numerics/dense.hpp"

namespace rssi {

enum class OptimizerKind { Adam, NAdam };

inline const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "nadam";
}

// Moment accumulators over a flat parameter vector.
template <typename Scalar>
struct OptimizerState {
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  std::int64_t step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  OptimizerState() = default;
  explicit OptimizerState(Index parameter_count)
      : m(VectorX<Scalar>::Zero(parameter_count)),
        v(VectorX<Scalar>::Zero(parameter_count)) {}
};

namespace detail {

template <typename Scalar>
void check_step_inputs(const VectorX<Scalar>& params,
                       const VectorX<Scalar>& grads,
                       const OptimizerState<Scalar>& state, Scalar lr,
                       const char* who) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError(std::string(who) + ": params " +
                     std::to_string(params.size()) + ", grads " +
                     std::to_string(grads.size()) + ", state " +
                     std::to_string(state.m.size()) + "/" +
                     std::to_string(state.v.size()));
  }
  if (!(lr > Scalar(0))) {
    throw ValueError(std::string(who) + ": learning rate must be positive");
  }
  if (!grads.allFinite()) {
    for (Index i = 0; i < grads.size(); ++i) {
      if (!std::isfinite(static_cast<double>(grads[i]))) {
        throw NumericalError(std::string(who) +
                             ": non-finite gradient at parameter " +
                             std::to_string(i));
      }
    }
  }
}

}  // namespace detail

// Adam with bias correction:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
template <typename Scalar>
void adam_step(VectorX<Scalar>& params, const VectorX<Scalar>& grads,
               OptimizerState<Scalar>& state, Scalar lr) {
  detail::check_step_inputs(params, grads, state, lr, "adam_step");
  const Scalar b1 = state.beta1, b2 = state.beta2;
  ++state.step;
  const auto t = static_cast<Scalar>(state.step);
  state.m = b1 * state.m + (Scalar(1) - b1) * grads;
  state.v = b2 * state.v + (Scalar(1) - b2) * grads.cwiseAbs2();
  const Scalar step_scale = lr / (Scalar(1) - std::pow(b1, t));
  const Scalar inv_c2 = Scalar(1) / (Scalar(1) - std::pow(b2, t));
  params.array() -= step_scale * state.m.array() /
                    ((state.v.array() * inv_c2).sqrt() + state.epsilon);
}

// Nesterov-accelerated Adam with a constant momentum coefficient (no momentum
// decay schedule). The first-moment estimate looks one step ahead by blending
// the corrected moment with the current gradient:
//   m_hat = b1 m_t / (1 - b1^(t+1)) + (1-b1) g_t / (1 - b1^t)
//   theta <- theta - lr * m_hat / (sqrt(v_t / (1 - b2^t)) + eps)
template <typename Scalar>
void nadam_step(VectorX<Scalar>& params, const VectorX<Scalar>& grads,
                OptimizerState<Scalar>& state, Scalar lr) {
  detail::check_step_inputs(params, grads, state, lr, "nadam_step");
  const Scalar b1 = state.beta1, b2 = state.beta2;
  ++state.step;
  const auto t = static_cast<Scalar>(state.step);
  state.m = b1 * state.m + (Scalar(1) - b1) * grads;
  state.v = b2 * state.v + (Scalar(1) - b2) * grads.cwiseAbs2();
  const Scalar w_m = lr * b1 / (Scalar(1) - std::pow(b1, t + Scalar(1)));
  const Scalar w_g = lr * (Scalar(1) - b1) / (Scalar(1) - std::pow(b1, t));
  const Scalar inv_c2 = Scalar(1) / (Scalar(1) - std::pow(b2, t));
  params.array() -= (w_m * state.m.array() + w_g * grads.array()) /
                    ((state.v.array() * inv_c2).sqrt() + state.epsilon);
}

template <typename Scalar>
void optimizer_step(OptimizerKind kind, VectorX<Scalar>& params,
                    const VectorX<Scalar>& grads, OptimizerState<Scalar>& state,
                    Scalar lr) {
  if (kind == OptimizerKind::Adam) {
    adam_step(params, grads, state, lr);
  } else {
    nadam_step(params, grads, state, lr);
  }
}

}  // namespace rssi
