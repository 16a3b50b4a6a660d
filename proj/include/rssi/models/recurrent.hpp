#pragma once

// Single-layer Elman RNN and LSTM cells unrolled over a fixed window, each
// followed by a linear readout to one output. Inputs are laid out as
// (step_dim * window) x batch; rows [t*step_dim, (t+1)*step_dim) hold step t.
// The initial hidden (and cell) state is zero.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "rssi/error.hpp"
#include "rssi/numerics/dense.hpp"
#include "rssi/random.hpp"

namespace rssi {

template <typename Scalar>
struct RnnNetwork {
  MatrixX<Scalar> w_input;      // H x D
  MatrixX<Scalar> w_recurrent;  // H x H
  VectorX<Scalar> bias;         // H
  RowVectorX<Scalar> readout;   // 1 x H
  Scalar readout_bias = Scalar(0);
  Index window = 1;

  Index hidden() const { return w_input.rows(); }
  Index step_dim() const { return w_input.cols(); }
  Index input_rows() const { return step_dim() * window; }
};

// Gate blocks are stacked in the order input, forget, candidate, output.
template <typename Scalar>
struct LstmNetwork {
  MatrixX<Scalar> w_input;      // 4H x D
  MatrixX<Scalar> w_recurrent;  // 4H x H
  VectorX<Scalar> bias;         // 4H
  RowVectorX<Scalar> readout;   // 1 x H
  Scalar readout_bias = Scalar(0);
  Index window = 1;

  Index hidden() const { return w_recurrent.cols(); }
  Index step_dim() const { return w_input.cols(); }
  Index input_rows() const { return step_dim() * window; }
};

template <typename Scalar>
struct RnnCache {
  MatrixX<Scalar> inputs;
  std::vector<MatrixX<Scalar>> hidden;  // h_1 .. h_W
};

template <typename Scalar>
struct LstmCache {
  MatrixX<Scalar> inputs;
  std::vector<MatrixX<Scalar>> gates;  // activated i, f, g, o stacked, per step
  std::vector<MatrixX<Scalar>> cell;   // c_1 .. c_W
  std::vector<MatrixX<Scalar>> cell_tanh;  // tanh(c_t)
  std::vector<MatrixX<Scalar>> hidden;  // h_1 .. h_W
};

namespace detail {

template <typename Net, typename Scalar>
void check_recurrent_input(const Net& net, const MatrixX<Scalar>& x,
                           const char* who) {
  if (net.window < 1) throw ShapeError(std::string(who) + ": window must be >= 1");
  if (x.rows() != net.input_rows()) {
    throw ShapeError(std::string(who) + ": input has " + std::to_string(x.rows()) +
                     " rows, expected step_dim " + std::to_string(net.step_dim()) +
                     " x window " + std::to_string(net.window));
  }
  if (!x.allFinite()) throw ValueError(std::string(who) + ": non-finite input");
}

template <typename Scalar>
void check_state(const MatrixX<Scalar>& h, Index t, const char* who) {
  if (!h.allFinite()) {
    throw NumericalError(std::string(who) + ": non-finite state at timestep " +
                         std::to_string(t));
  }
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// In-place activations built on Eigen's vectorised exp.
template <typename Block>
void sigmoid_inplace(Block&& b) {
  using Scalar = typename std::decay_t<Block>::Scalar;
  b = (Scalar(1) + (-b.array()).exp()).inverse().matrix();
}

template <typename Block>
void tanh_inplace(Block&& b) {
  using Scalar = typename std::decay_t<Block>::Scalar;
  // tanh(x) = 2 sigmoid(2x) - 1; the clamp keeps exp finite.
  b = (Scalar(2) / (Scalar(1) + (Scalar(-2) * b.array().max(Scalar(-300)).min(Scalar(300))).exp()) -
       Scalar(1))
          .matrix();
}

// Views of one flat gradient buffer in the flatten_recurrent layout.
template <typename Scalar>
struct FlatRecurrentGrad {
  Eigen::Map<MatrixX<Scalar>> w_input;
  Eigen::Map<MatrixX<Scalar>> w_recurrent;
  Eigen::Map<VectorX<Scalar>> bias;
  Eigen::Map<RowVectorX<Scalar>> readout;
  Scalar& readout_bias;

  template <typename Net>
  FlatRecurrentGrad(const Net& n, VectorX<Scalar>& flat)
      : w_input(flat.data(), n.w_input.rows(), n.w_input.cols()),
        w_recurrent(w_input.data() + w_input.size(), n.w_recurrent.rows(),
                    n.w_recurrent.cols()),
        bias(w_recurrent.data() + w_recurrent.size(), n.bias.size()),
        readout(bias.data() + bias.size(), n.readout.size()),
        readout_bias(*(readout.data() + readout.size())) {}
};

}  // namespace detail

template <typename Scalar>
Index parameter_count(const RnnNetwork<Scalar>& n) {
  return n.w_input.size() + n.w_recurrent.size() + n.bias.size() +
         n.readout.size() + 1;
}

template <typename Scalar>
Index parameter_count(const LstmNetwork<Scalar>& n) {
  return n.w_input.size() + n.w_recurrent.size() + n.bias.size() +
         n.readout.size() + 1;
}

// Flat layout: w_input, w_recurrent (column-major), bias, readout, readout_bias.
template <typename Net>
auto flatten_recurrent(const Net& n) {
  using Scalar = typename decltype(n.bias)::Scalar;
  VectorX<Scalar> flat(parameter_count(n));
  Index off = 0;
  auto put = [&](const auto& m) {
    flat.segment(off, m.size()) = m.reshaped();
    off += m.size();
  };
  put(n.w_input);
  put(n.w_recurrent);
  put(n.bias);
  put(n.readout);
  flat[off] = n.readout_bias;
  return flat;
}

template <typename Net, typename Scalar>
void assign_recurrent(Net& n, const VectorX<Scalar>& flat) {
  if (flat.size() != parameter_count(n)) {
    throw ShapeError("assign_parameters: got " + std::to_string(flat.size()) +
                     " values for " + std::to_string(parameter_count(n)) +
                     " parameters");
  }
  Index off = 0;
  auto take = [&](auto& m) {
    m.reshaped() = flat.segment(off, m.size());
    off += m.size();
  };
  take(n.w_input);
  take(n.w_recurrent);
  take(n.bias);
  take(n.readout);
  n.readout_bias = flat[off];
}

template <typename Scalar>
RowVectorX<Scalar> rnn_forward(const RnnNetwork<Scalar>& net,
                               const MatrixX<Scalar>& inputs,
                               RnnCache<Scalar>* cache = nullptr) {
  detail::check_recurrent_input(net, inputs, "rnn_forward");
  RnnCache<Scalar> local;
  RnnCache<Scalar>& c = cache != nullptr ? *cache : local;
  const Index d = net.step_dim();
  c.inputs = inputs;
  c.hidden.resize(static_cast<std::size_t>(net.window));
  for (Index t = 0; t < net.window; ++t) {
    auto& h = c.hidden[static_cast<std::size_t>(t)];
    h.noalias() = net.w_input * inputs.middleRows(t * d, d);
    // The t = 0 recurrent term multiplies the zero initial state.
    if (t > 0) {
      h.noalias() += net.w_recurrent * c.hidden[static_cast<std::size_t>(t - 1)];
    }
    h.colwise() += net.bias;
    detail::tanh_inplace(h);
    detail::check_state(h, t, "rnn_forward");
  }
  RowVectorX<Scalar> out = net.readout * c.hidden.back();
  out.array() += net.readout_bias;
  return out;
}

// Gradient of sum_j output_grad[j] * y[j] with respect to every parameter,
// full backpropagation through time over the window. Flat layout as
// flatten_recurrent. The in-place form reuses `flat`.
template <typename Scalar>
void rnn_backward(const RnnNetwork<Scalar>& net, const RnnCache<Scalar>& cache,
                  const RowVectorX<Scalar>& output_grad, VectorX<Scalar>& flat) {
  const Index batch = output_grad.size();
  if (cache.hidden.size() != static_cast<std::size_t>(net.window) ||
      cache.inputs.rows() != net.input_rows() || cache.inputs.cols() != batch ||
      cache.hidden.back().rows() != net.hidden()) {
    throw ShapeError("rnn_backward: cache does not match network or batch");
  }
  const Index d = net.step_dim();
  flat.setZero(parameter_count(net));
  detail::FlatRecurrentGrad<Scalar> g(net, flat);
  g.readout.noalias() = output_grad * cache.hidden.back().transpose();
  g.readout_bias = output_grad.sum();

  MatrixX<Scalar> dh = net.readout.transpose() * output_grad;
  MatrixX<Scalar> da;
  for (Index t = net.window; t-- > 0;) {
    const auto& ht = cache.hidden[static_cast<std::size_t>(t)];
    da = dh.array() * (Scalar(1) - ht.array().square());
    g.w_input.noalias() += da * cache.inputs.middleRows(t * d, d).transpose();
    g.bias += da.rowwise().sum();
    if (t > 0) {
      g.w_recurrent.noalias() += da * cache.hidden[static_cast<std::size_t>(t - 1)].transpose();
      dh.noalias() = net.w_recurrent.transpose() * da;
    }
  }
}

template <typename Scalar>
VectorX<Scalar> rnn_backward(const RnnNetwork<Scalar>& net,
                             const RnnCache<Scalar>& cache,
                             const RowVectorX<Scalar>& output_grad) {
  VectorX<Scalar> flat;
  rnn_backward(net, cache, output_grad, flat);
  return flat;
}

template <typename Scalar>
RowVectorX<Scalar> lstm_forward(const LstmNetwork<Scalar>& net,
                                const MatrixX<Scalar>& inputs,
                                LstmCache<Scalar>* cache = nullptr) {
  detail::check_recurrent_input(net, inputs, "lstm_forward");
  if (net.w_input.rows() != 4 * net.hidden() || net.bias.size() != 4 * net.hidden()) {
    throw ShapeError("lstm_forward: gate blocks must be 4 x hidden");
  }
  LstmCache<Scalar> local;
  LstmCache<Scalar>& c = cache != nullptr ? *cache : local;
  const Index d = net.step_dim();
  const Index h = net.hidden();
  const auto steps = static_cast<std::size_t>(net.window);
  c.inputs = inputs;
  c.gates.resize(steps);
  c.cell.resize(steps);
  c.cell_tanh.resize(steps);
  c.hidden.resize(steps);
  for (Index t = 0; t < net.window; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    auto& z = c.gates[ts];
    z.noalias() = net.w_input * inputs.middleRows(t * d, d);
    if (t > 0) z.noalias() += net.w_recurrent * c.hidden[ts - 1];
    z.colwise() += net.bias;
    detail::sigmoid_inplace(z.topRows(2 * h));
    detail::tanh_inplace(z.middleRows(2 * h, h));
    detail::sigmoid_inplace(z.bottomRows(h));

    auto& cell = c.cell[ts];
    cell = z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
    if (t > 0) cell += z.middleRows(h, h).cwiseProduct(c.cell[ts - 1]);
    auto& tc = c.cell_tanh[ts];
    tc = cell;
    detail::tanh_inplace(tc);
    c.hidden[ts] = z.bottomRows(h).cwiseProduct(tc);
    detail::check_state(c.hidden[ts], t, "lstm_forward");
  }
  RowVectorX<Scalar> out = net.readout * c.hidden.back();
  out.array() += net.readout_bias;
  return out;
}

template <typename Scalar>
void lstm_backward(const LstmNetwork<Scalar>& net, const LstmCache<Scalar>& cache,
                   const RowVectorX<Scalar>& output_grad, VectorX<Scalar>& flat) {
  const Index batch = output_grad.size();
  if (cache.hidden.size() != static_cast<std::size_t>(net.window) ||
      cache.cell_tanh.size() != cache.hidden.size() ||
      cache.inputs.rows() != net.input_rows() || cache.inputs.cols() != batch ||
      cache.hidden.back().rows() != net.hidden()) {
    throw ShapeError("lstm_backward: cache does not match network or batch");
  }
  const Index d = net.step_dim();
  const Index h = net.hidden();
  flat.setZero(parameter_count(net));
  detail::FlatRecurrentGrad<Scalar> grad(net, flat);
  grad.readout.noalias() = output_grad * cache.hidden.back().transpose();
  grad.readout_bias = output_grad.sum();

  MatrixX<Scalar> dh = net.readout.transpose() * output_grad;
  MatrixX<Scalar> dc = MatrixX<Scalar>::Zero(h, batch);
  MatrixX<Scalar> dz(4 * h, batch);
  for (Index t = net.window; t-- > 0;) {
    const auto ts = static_cast<std::size_t>(t);
    const auto& z = cache.gates[ts];
    const auto i = z.topRows(h).array();
    const auto f = z.middleRows(h, h).array();
    const auto g = z.middleRows(2 * h, h).array();
    const auto o = z.bottomRows(h).array();
    const auto tc = cache.cell_tanh[ts].array();

    dc.array() += dh.array() * o * (Scalar(1) - tc.square());
    dz.bottomRows(h) = (dh.array() * tc * o * (Scalar(1) - o)).matrix();
    dz.topRows(h) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    dz.middleRows(2 * h, h) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
    if (t > 0) {
      dz.middleRows(h, h) =
          (dc.array() * cache.cell[ts - 1].array() * f * (Scalar(1) - f)).matrix();
    } else {
      dz.middleRows(h, h).setZero();
    }

    grad.w_input.noalias() += dz * cache.inputs.middleRows(t * d, d).transpose();
    grad.bias += dz.rowwise().sum();
    if (t > 0) {
      grad.w_recurrent.noalias() += dz * cache.hidden[ts - 1].transpose();
      dh.noalias() = net.w_recurrent.transpose() * dz;
      dc.array() *= f;
    }
  }
}

template <typename Scalar>
VectorX<Scalar> lstm_backward(const LstmNetwork<Scalar>& net,
                              const LstmCache<Scalar>& cache,
                              const RowVectorX<Scalar>& output_grad) {
  VectorX<Scalar> flat;
  lstm_backward(net, cache, output_grad, flat);
  return flat;
}

namespace detail {

// Glorot-uniform block.
template <typename Scalar>
MatrixX<Scalar> glorot_uniform(Index rows, Index cols, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(cols + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  MatrixX<Scalar> m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Scalar>(dist(rng));
  return m;
}

// Square orthogonal block from the QR factor of a Gaussian matrix.
template <typename Scalar>
MatrixX<Scalar> orthogonal(Index n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixX<Scalar> a(n, n);
  for (Index k = 0; k < a.size(); ++k) a.data()[k] = static_cast<Scalar>(dist(rng));
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ();
  // Sign fix makes the distribution uniform over orthogonal matrices.
  const VectorX<Scalar> diag = qr.matrixQR().diagonal();
  for (Index j = 0; j < n; ++j) {
    if (diag[j] < Scalar(0)) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace detail

// Glorot-uniform input and readout weights, orthogonal recurrent weights,
// zero biases.
template <typename Scalar>
RnnNetwork<Scalar> init_rnn(Index step_dim, Index hidden, Index window, Rng& rng) {
  if (step_dim < 1 || hidden < 1 || window < 1) {
    throw ValueError("init_rnn: dimensions must be positive");
  }
  RnnNetwork<Scalar> n;
  n.window = window;
  n.w_input = detail::glorot_uniform<Scalar>(hidden, step_dim, hidden, rng);
  n.w_recurrent = detail::orthogonal<Scalar>(hidden, rng);
  n.bias = VectorX<Scalar>::Zero(hidden);
  n.readout = detail::glorot_uniform<Scalar>(1, hidden, 1, rng);
  return n;
}

// As init_rnn, per gate block; forget-gate biases start at 1.
template <typename Scalar>
LstmNetwork<Scalar> init_lstm(Index step_dim, Index hidden, Index window, Rng& rng) {
  if (step_dim < 1 || hidden < 1 || window < 1) {
    throw ValueError("init_lstm: dimensions must be positive");
  }
  LstmNetwork<Scalar> n;
  n.window = window;
  n.w_input.resize(4 * hidden, step_dim);
  n.w_recurrent.resize(4 * hidden, hidden);
  for (Index gate = 0; gate < 4; ++gate) {
    n.w_input.middleRows(gate * hidden, hidden) =
        detail::glorot_uniform<Scalar>(hidden, step_dim, hidden, rng);
    n.w_recurrent.middleRows(gate * hidden, hidden) =
        detail::orthogonal<Scalar>(hidden, rng);
  }
  n.bias = VectorX<Scalar>::Zero(4 * hidden);
  n.bias.segment(hidden, hidden).setOnes();
  n.readout = detail::glorot_uniform<Scalar>(1, hidden, 1, rng);
  return n;
}

}  // namespace rssi
