#pragma once

// Dense feed-forward layers: batched forward pass, analytic backward pass and
// flat parameter views. Batches are column-major: one sample per column.

#include <Eigen/Dense>

#include <sstream>
#include <string>
#include <vector>

#include "rssi/error.hpp"

namespace rssi {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

enum class Activation { ReLU, Linear };

inline const char* to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "linear";
}

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out_dim x in_dim
  VectorX<Scalar> biases;   // out_dim
  Activation activation = Activation::Linear;

  Index in_dim() const { return weights.cols(); }
  Index out_dim() const { return weights.rows(); }
};

template <typename Scalar>
struct MlpNetwork {
  std::vector<DenseLayer<Scalar>> layers;
  Index input_dim = 0;

  Index output_dim() const {
    return layers.empty() ? input_dim : layers.back().out_dim();
  }

  // Throws ShapeError unless every layer chains onto the previous one.
  void validate() const {
    if (input_dim <= 0) throw ShapeError("mlp: input_dim must be positive");
    Index expected = input_dim;
    for (std::size_t t = 0; t < layers.size(); ++t) {
      const auto& l = layers[t];
      if (l.in_dim() != expected || l.biases.size() != l.out_dim()) {
        std::ostringstream os;
        os << "mlp: layer " << t << " has weights " << l.out_dim() << "x"
           << l.in_dim() << " and " << l.biases.size()
           << " biases, expected input width " << expected;
        throw ShapeError(os.str());
      }
      expected = l.out_dim();
    }
  }
};

// Per-layer multiplicative dropout scales (0 or 1/(1-rate)), one matrix per
// layer shaped like that layer's output batch. An empty matrix disables
// dropout for the layer.
template <typename Scalar>
using DropoutScales = std::vector<MatrixX<Scalar>>;

// Everything backward needs: the input seen by each layer and its
// pre-activation, plus the dropout scales that were applied.
template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> inputs;
  std::vector<MatrixX<Scalar>> pre_activations;
  DropoutScales<Scalar> dropout;
  MatrixX<Scalar> output;
};

template <typename Scalar>
struct MlpGradients {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;
};

namespace detail {

inline std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

template <typename Scalar>
Index parameter_count(const MlpNetwork<Scalar>& net) {
  Index n = 0;
  for (const auto& l : net.layers) n += l.weights.size() + l.biases.size();
  return n;
}

// Batched forward pass. `inputs` is input_dim x batch; returns the
// output_dim x batch result. When `cache` is non-null it is filled for
// mlp_backward_batch.
template <typename Scalar>
MatrixX<Scalar> mlp_forward_batch(const MlpNetwork<Scalar>& net,
                                  const MatrixX<Scalar>& inputs,
                                  ForwardCache<Scalar>* cache = nullptr,
                                  const DropoutScales<Scalar>* dropout = nullptr) {
  if (inputs.rows() != net.input_dim) {
    throw ShapeError("mlp_forward: input is " +
                     detail::shape_str(inputs.rows(), inputs.cols()) +
                     " but network expects " + std::to_string(net.input_dim) +
                     " rows");
  }
  if (!inputs.allFinite()) {
    throw ValueError("mlp_forward: non-finite input");
  }
  if (dropout != nullptr && dropout->size() != net.layers.size()) {
    throw ShapeError("mlp_forward: dropout plan has " +
                     std::to_string(dropout->size()) + " entries for " +
                     std::to_string(net.layers.size()) + " layers");
  }

  ForwardCache<Scalar> local;
  ForwardCache<Scalar>& c = cache != nullptr ? *cache : local;
  const std::size_t depth = net.layers.size();
  c.inputs.resize(depth);
  c.pre_activations.resize(depth);
  c.dropout.resize(depth);

  if (depth == 0) {
    c.output = inputs;
    return c.output;
  }
  c.inputs[0] = inputs;
  for (std::size_t t = 0; t < depth; ++t) {
    const auto& layer = net.layers[t];
    MatrixX<Scalar>& z = c.pre_activations[t];
    z.noalias() = layer.weights * c.inputs[t];
    z.colwise() += layer.biases;
    MatrixX<Scalar>& a = t + 1 < depth ? c.inputs[t + 1] : c.output;
    if (layer.activation == Activation::ReLU) {
      a = z.cwiseMax(Scalar(0));
    } else {
      a = z;
    }
    const bool drop = dropout != nullptr && (*dropout)[t].size() != 0;
    if (drop) {
      const auto& s = (*dropout)[t];
      if (s.rows() != a.rows() || s.cols() != a.cols()) {
        throw ShapeError("mlp_forward: dropout scales for layer " +
                         std::to_string(t) + " are " +
                         detail::shape_str(s.rows(), s.cols()) +
                         ", activations are " +
                         detail::shape_str(a.rows(), a.cols()));
      }
      a.array() *= s.array();
      c.dropout[t] = s;
    } else {
      c.dropout[t].resize(0, 0);
    }
  }
  return c.output;
}

template <typename Scalar>
struct ForwardResult {
  Scalar output;
  ForwardCache<Scalar> cache;
};

// Single-sample forward for networks with one output unit.
template <typename Scalar>
ForwardResult<Scalar> mlp_forward(const MlpNetwork<Scalar>& net,
                                  const VectorX<Scalar>& input) {
  if (net.output_dim() != 1) {
    throw ShapeError("mlp_forward: scalar form needs output_dim 1, network has " +
                     std::to_string(net.output_dim()));
  }
  ForwardResult<Scalar> r{Scalar(0), {}};
  MatrixX<Scalar> x = input;
  r.output = mlp_forward_batch(net, x, &r.cache)(0, 0);
  return r;
}

// Backward pass from d(loss)/d(output), output_dim x batch. Gradients are
// summed over the batch columns.
template <typename Scalar>
void mlp_backward_batch(const MlpNetwork<Scalar>& net,
                        const ForwardCache<Scalar>& cache,
                        const MatrixX<Scalar>& output_grad,
                        MlpGradients<Scalar>& grads) {
  const std::size_t depth = net.layers.size();
  if (cache.inputs.size() != depth || cache.pre_activations.size() != depth ||
      cache.dropout.size() != depth) {
    throw ShapeError("mlp_backward: cache depth does not match network");
  }
  const Index batch = output_grad.cols();
  for (std::size_t t = 0; t < depth; ++t) {
    const auto& l = net.layers[t];
    if (cache.inputs[t].rows() != l.in_dim() ||
        cache.pre_activations[t].rows() != l.out_dim() ||
        cache.inputs[t].cols() != batch ||
        cache.pre_activations[t].cols() != batch) {
      throw ShapeError("mlp_backward: stale cache at layer " +
                       std::to_string(t) + " (cached input " +
                       detail::shape_str(cache.inputs[t].rows(),
                                         cache.inputs[t].cols()) +
                       ", layer " + detail::shape_str(l.out_dim(), l.in_dim()) +
                       ", batch " + std::to_string(batch) + ")");
    }
  }
  if (output_grad.rows() != net.output_dim()) {
    throw ShapeError("mlp_backward: output gradient has " +
                     std::to_string(output_grad.rows()) + " rows, network emits " +
                     std::to_string(net.output_dim()));
  }

  grads.weights.resize(depth);
  grads.biases.resize(depth);
  MatrixX<Scalar> delta = output_grad;
  for (std::size_t k = depth; k-- > 0;) {
    const auto& l = net.layers[k];
    if (cache.dropout[k].size() != 0) delta.array() *= cache.dropout[k].array();
    if (l.activation == Activation::ReLU) {
      // Subgradient at exactly zero is zero.
      delta = (cache.pre_activations[k].array() > Scalar(0))
                  .select(delta, Scalar(0));
    }
    grads.weights[k].noalias() = delta * cache.inputs[k].transpose();
    grads.biases[k] = delta.rowwise().sum();
    if (k > 0) {
      MatrixX<Scalar> prev;
      prev.noalias() = l.weights.transpose() * delta;
      delta = std::move(prev);
    }
  }
}

template <typename Scalar>
MlpGradients<Scalar> mlp_backward_batch(const MlpNetwork<Scalar>& net,
                                        const ForwardCache<Scalar>& cache,
                                        const MatrixX<Scalar>& output_grad) {
  MlpGradients<Scalar> g;
  mlp_backward_batch(net, cache, output_grad, g);
  return g;
}

template <typename Scalar>
MlpGradients<Scalar> mlp_backward(const MlpNetwork<Scalar>& net,
                                  const ForwardCache<Scalar>& cache,
                                  Scalar loss_grad) {
  MatrixX<Scalar> seed = MatrixX<Scalar>::Constant(1, 1, loss_grad);
  return mlp_backward_batch(net, cache, seed);
}

// Flat parameter layout: for each layer, weights (column-major) then biases.
template <typename Scalar>
VectorX<Scalar> flatten_parameters(const MlpNetwork<Scalar>& net) {
  VectorX<Scalar> flat(parameter_count(net));
  Index off = 0;
  for (const auto& l : net.layers) {
    flat.segment(off, l.weights.size()) = l.weights.reshaped();
    off += l.weights.size();
    flat.segment(off, l.biases.size()) = l.biases;
    off += l.biases.size();
  }
  return flat;
}

template <typename Scalar>
void assign_parameters(MlpNetwork<Scalar>& net, const VectorX<Scalar>& flat) {
  if (flat.size() != parameter_count(net)) {
    throw ShapeError("assign_parameters: got " + std::to_string(flat.size()) +
                     " values for " + std::to_string(parameter_count(net)) +
                     " parameters");
  }
  Index off = 0;
  for (auto& l : net.layers) {
    l.weights.reshaped() = flat.segment(off, l.weights.size());
    off += l.weights.size();
    l.biases = flat.segment(off, l.biases.size());
    off += l.biases.size();
  }
}

template <typename Scalar>
void flatten_gradients(const MlpGradients<Scalar>& g, VectorX<Scalar>& flat) {
  Index n = 0;
  for (std::size_t t = 0; t < g.weights.size(); ++t)
    n += g.weights[t].size() + g.biases[t].size();
  flat.resize(n);
  Index off = 0;
  for (std::size_t t = 0; t < g.weights.size(); ++t) {
    flat.segment(off, g.weights[t].size()) = g.weights[t].reshaped();
    off += g.weights[t].size();
    flat.segment(off, g.biases[t].size()) = g.biases[t];
    off += g.biases[t].size();
  }
}

template <typename Scalar>
VectorX<Scalar> flatten_gradients(const MlpGradients<Scalar>& g) {
  VectorX<Scalar> flat;
  flatten_gradients(g, flat);
  return flat;
}

}  // namespace rssi
