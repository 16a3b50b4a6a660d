#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "rssi/error.hpp"
#include "rssi/numerics/dense.hpp"
#include "rssi/numerics/dropout.hpp"
#include "rssi/numerics/init.hpp"
#include "rssi/numerics/loss.hpp"
#include "rssi/numerics/optimizer.hpp"

namespace rssi {
namespace {

MlpNetwork<double> tiny_net() {
  MlpNetwork<double> net;
  net.input_dim = 2;
  DenseLayer<double> hidden;
  hidden.weights = (Eigen::MatrixXd(2, 2) << 1.0, -1.0, 0.5, 2.0).finished();
  hidden.biases = Eigen::Vector2d(0.0, -1.0);
  hidden.activation = Activation::ReLU;
  DenseLayer<double> out;
  out.weights = (Eigen::MatrixXd(1, 2) << 2.0, -3.0).finished();
  out.biases = Eigen::VectorXd::Constant(1, 0.25);
  out.activation = Activation::Linear;
  net.layers = {hidden, out};
  return net;
}

TEST(Dense, ForwardMatchesHandComputation) {
  const auto net = tiny_net();
  // z1 = [1 - 1, 0.5 + 2 - 1] = [0, 1.5]; relu -> [0, 1.5]; y = -4.5 + 0.25
  const auto r = mlp_forward(net, Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)));
  EXPECT_DOUBLE_EQ(r.output, -4.25);
}

TEST(Dense, ReluSubgradientAtZeroIsZero) {
  const auto net = tiny_net();
  const auto r = mlp_forward(net, Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)));
  const auto g = mlp_backward(net, r.cache, 1.0);
  // First hidden unit sits exactly at zero: no gradient reaches its weights.
  EXPECT_EQ(g.weights[0].row(0).norm(), 0.0);
  EXPECT_EQ(g.biases[0][0], 0.0);
  EXPECT_DOUBLE_EQ(g.biases[0][1], -3.0);
  EXPECT_DOUBLE_EQ(g.biases[1][0], 1.0);
}

TEST(Dense, ShapeMismatchIsRejected) {
  const auto net = tiny_net();
  EXPECT_THROW(mlp_forward_batch(net, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 4))), ShapeError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(mlp_forward_batch(net, bad), ValueError);
}

TEST(Dense, StaleCacheIsRejected) {
  const auto net = tiny_net();
  ForwardCache<double> cache;
  mlp_forward_batch(net, Eigen::MatrixXd(Eigen::MatrixXd::Ones(2, 3)), &cache);
  EXPECT_THROW(mlp_backward_batch(net, cache, Eigen::MatrixXd(Eigen::MatrixXd::Ones(1, 5))), ShapeError);
}

TEST(Dense, FlattenAssignRoundTrip) {
  auto net = tiny_net();
  const Eigen::VectorXd flat = flatten_parameters(net);
  ASSERT_EQ(flat.size(), parameter_count(net));
  EXPECT_EQ(flat.size(), 9);
  auto copy = net;
  assign_parameters(copy, Eigen::VectorXd(flat * 2.0));
  EXPECT_EQ(flatten_parameters(copy), Eigen::VectorXd(flat * 2.0));
  EXPECT_THROW(assign_parameters(copy, Eigen::VectorXd(Eigen::VectorXd::Zero(8))), ShapeError);
}

TEST(Dense, BatchForwardEqualsPerSampleForward) {
  Rng rng(3);
  MlpNetwork<double> net;
  net.input_dim = 3;
  net.layers = {he_dense_layer<double>(3, 8, Activation::ReLU, rng),
                he_dense_layer<double>(8, 1, Activation::Linear, rng)};
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 10);
  const Eigen::MatrixXd batch = mlp_forward_batch(net, x);
  for (Index j = 0; j < x.cols(); ++j) {
    EXPECT_NEAR(batch(0, j), mlp_forward(net, Eigen::VectorXd(x.col(j))).output, 1e-12);
  }
}

TEST(Loss, MseAndRmse) {
  const Eigen::VectorXd a = Eigen::Vector3d(1.0, 2.0, 3.0);
  const Eigen::VectorXd b = Eigen::Vector3d(1.0, 0.0, 6.0);
  EXPECT_DOUBLE_EQ(mse(a, b), 13.0 / 3.0);
  EXPECT_DOUBLE_EQ(mse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(rmse(4.0), 2.0);
  EXPECT_THROW(rmse(-1.0), ValueError);
  EXPECT_THROW(mse(a, Eigen::VectorXd(Eigen::Vector2d(1, 2))), ShapeError);
  EXPECT_THROW(mse(Eigen::VectorXd(), Eigen::VectorXd()), ValueError);
}

TEST(Loss, RowAndColumnVectorsMix) {
  const Eigen::RowVectorXd a = Eigen::RowVector2d(1.0, 3.0);
  const Eigen::VectorXd b = Eigen::Vector2d(2.0, 1.0);
  EXPECT_DOUBLE_EQ(mse(a, b), 2.5);
}

TEST(Optimizer, AdamFirstStepClosedForm) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  OptimizerState<double> state(1);
  adam_step(theta, Eigen::VectorXd::Ones(1).eval(), state, 0.01);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(theta[0], -0.01 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(state.step, 1);
}

TEST(Optimizer, AdamFirstStepIsScaleInvariant) {
  for (double g : {1e-3, 0.5, 7.0, -42.0}) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
    OptimizerState<double> state(1);
    adam_step(theta, Eigen::VectorXd(Eigen::VectorXd::Constant(1, g)), state, 0.01);
    EXPECT_NEAR(std::abs(theta[0]), 0.01, 1e-6) << g;
  }
}

TEST(Optimizer, NadamFirstStepClosedForm) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  OptimizerState<double> state(1);
  nadam_step(theta, Eigen::VectorXd::Ones(1).eval(), state, 0.001);
  const double m_hat = 0.9 * 0.1 / (1.0 - 0.81) + 0.1 / 0.1;
  EXPECT_NEAR(theta[0], -0.001 * m_hat / (1.0 + 1e-8), 1e-15);
}

TEST(Optimizer, SecondAdamStepClosedForm) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  OptimizerState<double> state(1);
  adam_step(theta, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 2.0)), state, 0.1);
  adam_step(theta, Eigen::VectorXd(Eigen::VectorXd::Constant(1, -1.0)), state, 0.1);
  const double m = 0.9 * 0.2 + 0.1 * -1.0;
  const double v = 0.999 * 0.004 + 0.001 * 1.0;
  const double step2 = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(theta[0], -0.1 * 2.0 / (2.0 + 1e-8) - step2, 1e-12);
}

TEST(Optimizer, BothDriveQuadraticToMinimum) {
  for (auto kind : {OptimizerKind::Adam, OptimizerKind::NAdam}) {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 5.0);
    OptimizerState<double> state(1);
    for (int k = 0; k < 2000; ++k) {
      optimizer_step(kind, theta, Eigen::VectorXd(2.0 * theta), state, 0.01);
    }
    EXPECT_LT(std::abs(theta[0]), 0.1) << to_string(kind);
  }
}

TEST(Optimizer, RejectsBadInputsWithoutMutating) {
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(3);
  OptimizerState<double> state(3);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(3);
  g[1] = std::numeric_limits<double>::infinity();
  try {
    adam_step(theta, g, state, 0.01);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("parameter 1"), std::string::npos);
  }
  EXPECT_EQ(theta, Eigen::VectorXd(Eigen::VectorXd::Ones(3)));
  EXPECT_EQ(state.step, 0);
  EXPECT_THROW(nadam_step(theta, Eigen::VectorXd::Ones(2).eval(), state, 0.01), ShapeError);
  EXPECT_THROW(adam_step(theta, Eigen::VectorXd::Ones(3).eval(), state, 0.0), ValueError);
}

TEST(Optimizer, ZeroGradientLeavesParametersUnchanged) {
  Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const Eigen::VectorXd before = theta;
  OptimizerState<double> state(4);
  nadam_step(theta, Eigen::VectorXd::Zero(4).eval(), state, 0.01);
  EXPECT_EQ(theta, before);
}

TEST(Init, HeVarianceMatchesFanIn) {
  Rng rng(11);
  const Eigen::MatrixXd w = he_init<double>(400, 64, rng);
  ASSERT_EQ(w.cols(), 64);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 2.0 / 64.0, 0.1 * 2.0 / 64.0);
  EXPECT_THROW(he_init<double>(3, 0, rng), ValueError);
}

TEST(Init, SameSeedSameWeights) {
  Rng a(5), b(5);
  EXPECT_EQ(he_init<double>(8, 3, a), he_init<double>(8, 3, b));
}

TEST(Dropout, DropFractionNearRate) {
  Rng rng(1);
  double dropped = 0;
  constexpr int kMasks = 10000;
  for (int k = 0; k < kMasks; ++k) {
    dropped += static_cast<double>((!sample_dropout_mask(64, 0.5, rng).keep).count());
  }
  EXPECT_NEAR(dropped / (kMasks * 64.0), 0.5, 0.05);
}

TEST(Dropout, InferenceIsIdentityTrainingScalesKept) {
  Rng rng(2);
  const auto mask = sample_dropout_mask(16, 0.5, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(16, 1, 16);
  const Eigen::VectorXd inf = mask.apply(x, Phase::Inference);
  EXPECT_EQ(std::memcmp(inf.data(), x.data(), sizeof(double) * 16), 0);
  const Eigen::VectorXd tr = mask.apply(x, Phase::Training);
  for (Index i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(tr[i], mask.keep[i] ? 2.0 * x[i] : 0.0);
}

TEST(Dropout, RateValidation) {
  Rng rng(0);
  EXPECT_THROW(sample_dropout_mask(4, 1.0, rng), ValueError);
  EXPECT_THROW(sample_dropout_mask(4, -0.1, rng), ValueError);
  EXPECT_EQ(sample_dropout_mask(4, 0.0, rng).keep.count(), 4);
}

TEST(Dropout, ScalesPreserveExpectation) {
  Rng rng(9);
  const Eigen::MatrixXd s = sample_dropout_scales<double>(64, 2000, 0.5, rng);
  EXPECT_NEAR(s.mean(), 1.0, 0.02);
  EXPECT_TRUE(((s.array() == 0.0) || (s.array() == 2.0)).all());
}

}  // namespace
}  // namespace rssi
