#include <cmath>

#include "doctest.h"
#include "nashae/errors.hpp"
#include "nashae/gradient_check.hpp"
#include "nashae/mlp.hpp"
#include "oracles.hpp"

using namespace nashae;

namespace {

double sum_loss(const RealMatrix& out, RealMatrix* grad) {
  double s = 0.0;
  for (double v : out.flat()) s += v;
  if (grad) *grad = RealMatrix(out.rows(), out.cols(), 1.0);
  return s;
}

MlpNetwork three_layer(Activation a, Activation b, Activation last) {
  // 4*8+8 + 8*6+6 + 6*3+3 = 115 parameters
  return MlpNetwork{{4, 8, a}, {8, 6, b}, {6, 3, last}};
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  const auto out = mlp_forward(net, oracle::random_matrix(4, 3, 1));
  for (double v : out.flat()) CHECK(v == 0.0);
}

TEST_CASE("single identity layer is an affine map") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  kaiming_init(net, 5);
  net.layers()[0].bias = {0.5, -1.5};
  const auto x = oracle::random_matrix(4, 3, 2);
  const auto out = mlp_forward(net, x);
  const auto& w = net.layers()[0].weights;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t o = 0; o < 2; ++o) {
      double s = net.layers()[0].bias[o];
      for (std::size_t i = 0; i < 3; ++i) s += w(o, i) * x(r, i);
      CHECK(out(r, o) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("two-layer selu net equals manual composition") {
  MlpNetwork net{{5, 4, Activation::Selu}, {4, 2, Activation::Selu}};
  kaiming_init(net, 11);
  const auto x = oracle::random_matrix(3, 5, 12);
  RealMatrix h = x;
  for (const auto& layer : net.layers()) {
    RealMatrix pre = oracle::triple_loop_matmul(h, transpose(layer.weights));
    for (std::size_t r = 0; r < pre.rows(); ++r)
      for (std::size_t c = 0; c < pre.cols(); ++c) pre(r, c) += layer.bias[c];
    h = activation_forward(Activation::Selu, pre);
  }
  const auto out = mlp_forward(net, x);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.flat()[i] == doctest::Approx(h.flat()[i]).epsilon(1e-13));
  CHECK(mlp_predict(net, x) == out);
}

TEST_CASE("forward is deterministic") {
  MlpNetwork a = three_layer(Activation::Selu, Activation::Sigmoid, Activation::Identity);
  kaiming_init(a, 3);
  MlpNetwork b = a;
  const auto x = oracle::random_matrix(7, 4, 4);
  CHECK(mlp_forward(a, x) == mlp_forward(b, x));
}

TEST_CASE("forward rejects wrong input width") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  CHECK_THROWS_AS(mlp_forward(net, RealMatrix(2, 4)), ShapeError);
  CHECK_THROWS_AS((MlpNetwork{{3, 2, Activation::Identity}, {3, 1, Activation::Identity}}), ShapeError);
}

TEST_CASE("backward before forward is a state error") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  CHECK_THROWS_AS(mlp_backward(net, RealMatrix(1, 2)), StateError);
}

TEST_CASE("zero upstream gives zero gradients") {
  MlpNetwork net = three_layer(Activation::Selu, Activation::Relu, Activation::Sigmoid);
  kaiming_init(net, 9);
  (void)mlp_forward(net, oracle::random_matrix(5, 4, 1));
  const auto gin = mlp_backward(net, RealMatrix(5, 3));
  for (double v : gin.flat()) CHECK(v == 0.0);
  for (auto block : net.gradient_blocks())
    for (double v : block) CHECK(v == 0.0);
}

TEST_CASE("linear layer with sum loss: dW is the column sum of inputs") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  kaiming_init(net, 1);
  const RealMatrix x{{1, 2, 3}, {4, 5, 6}};
  const auto out = mlp_forward(net, x);
  RealMatrix g;
  (void)sum_loss(out, &g);
  (void)mlp_backward(net, g);
  const auto& gw = net.layers()[0].grad_weights;
  for (std::size_t o = 0; o < 2; ++o) {
    CHECK(gw(o, 0) == 5.0);
    CHECK(gw(o, 1) == 7.0);
    CHECK(gw(o, 2) == 9.0);
    CHECK(net.layers()[0].grad_bias[o] == 2.0);
  }
}

TEST_CASE("backward leaves parameters unchanged") {
  MlpNetwork net = three_layer(Activation::Selu, Activation::Selu, Activation::Identity);
  kaiming_init(net, 2);
  const MlpNetwork before = net;
  (void)mlp_forward(net, oracle::random_matrix(3, 4, 2));
  (void)mlp_backward(net, oracle::random_matrix(3, 3, 3));
  CHECK(net.same_parameters(before));
}

TEST_CASE("parameter gradients match finite differences for every activation, 10 seeds") {
  const Activation kinds[] = {Activation::Identity, Activation::Sigmoid, Activation::Selu, Activation::Relu};
  for (auto kind : kinds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      CAPTURE(seed);
      MlpNetwork net = three_layer(kind, Activation::Selu, kind);
      kaiming_init(net, seed);
      for (auto& l : net.layers())
        for (double& b : l.bias) b = 0.05;  // keep ReLU kinks away from zero
      REQUIRE(net.parameter_count() <= 200);
      const auto x = oracle::random_matrix(6, 4, seed + 50);
      const auto target = oracle::random_matrix(6, 3, seed + 90);
      const auto res = gradient_check(net, half_mse_loss(target), x, 1e-5);
      CHECK(res.parameters_checked == net.parameter_count());
      CHECK(res.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("input gradient matches finite differences") {
  MlpNetwork net = three_layer(Activation::Sigmoid, Activation::Selu, Activation::Identity);
  kaiming_init(net, 21);
  RealMatrix x = oracle::random_matrix(3, 4, 22);
  const auto target = oracle::random_matrix(3, 3, 23);
  const auto loss = half_mse_loss(target);
  RealMatrix g;
  (void)loss(mlp_forward(net, x), &g);
  const auto gin = mlp_backward(net, g);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.flat()[i];
    x.flat()[i] = keep + h;
    const double up = loss(mlp_predict(net, x), nullptr);
    x.flat()[i] = keep - h;
    const double down = loss(mlp_predict(net, x), nullptr);
    x.flat()[i] = keep;
    CHECK(relative_error(gin.flat()[i], (up - down) / (2 * h)) < 1e-5);
  }
}

TEST_CASE("gradient_check on an identity net with quadratic loss is near exact") {
  MlpNetwork net{{3, 2, Activation::Identity}};
  kaiming_init(net, 4);
  const auto res = gradient_check(net, half_mse_loss(oracle::random_matrix(5, 2, 1)), oracle::random_matrix(5, 3, 2));
  CHECK(res.max_relative_error < 1e-8);
}

TEST_CASE("gradient_check reports the maximum over parameters") {
  MlpNetwork net = three_layer(Activation::Sigmoid, Activation::Selu, Activation::Identity);
  kaiming_init(net, 8);
  const auto x = oracle::random_matrix(4, 4, 8);
  const auto loss = half_mse_loss(oracle::random_matrix(4, 3, 9));
  const auto res = gradient_check(net, loss, x, 1e-5);
  CHECK(res.max_relative_error < 1e-4);
  // A corrupted gradient on one parameter must dominate the report.
  const LossFn skewed = [&](const RealMatrix& out, RealMatrix* g) {
    const double v = loss(out, g);
    if (g) (*g)(0, 0) *= 1.5;
    return v;
  };
  const auto bad = gradient_check(net, skewed, x, 1e-5);
  CHECK(bad.max_relative_error > 1e-2);
  CHECK(bad.max_relative_error >= res.max_relative_error);
}

TEST_CASE("adam with zero gradients leaves parameters and counts the step") {
  MlpNetwork net = three_layer(Activation::Selu, Activation::Selu, Activation::Identity);
  kaiming_init(net, 6);
  const MlpNetwork before = net;
  (void)mlp_forward(net, oracle::random_matrix(2, 4, 6));
  (void)mlp_backward(net, RealMatrix(2, 3));
  adam_step(net, AdamConfig{});
  CHECK(net.same_parameters(before));
  CHECK(net.step_count() == 1);
}

TEST_CASE("adam single step matches the hand calculation") {
  MlpNetwork net{{1, 1, Activation::Identity}};
  net.layers()[0].weights(0, 0) = 0.3;
  net.layers()[0].bias[0] = -0.2;
  (void)mlp_forward(net, RealMatrix{{1.0}});
  (void)mlp_backward(net, RealMatrix{{1.0}});  // g = 1 for both parameters
  const AdamConfig cfg{.learning_rate = 0.001};
  adam_step(net, cfg);
  const double m = (1 - cfg.beta1) * 1.0;
  const double v = (1 - cfg.beta2) * 1.0;
  const double m_hat = m / (1 - cfg.beta1);
  const double v_hat = v / (1 - cfg.beta2);
  const double delta = cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  CHECK(net.layers()[0].weights(0, 0) == doctest::Approx(0.3 - delta).epsilon(1e-15));
  CHECK(net.layers()[0].bias[0] == doctest::Approx(-0.2 - delta).epsilon(1e-15));
  CHECK(delta == doctest::Approx(0.001).epsilon(1e-7));

  // second step, same gradient: bias-corrected moments stay at 1
  (void)mlp_forward(net, RealMatrix{{1.0}});
  (void)mlp_backward(net, RealMatrix{{1.0}});
  const double w1 = net.layers()[0].weights(0, 0);
  adam_step(net, cfg);
  const double m2 = cfg.beta1 * m + (1 - cfg.beta1);
  const double v2 = cfg.beta2 * v + (1 - cfg.beta2);
  const double d2 = cfg.learning_rate * (m2 / (1 - cfg.beta1 * cfg.beta1)) /
                    (std::sqrt(v2 / (1 - cfg.beta2 * cfg.beta2)) + cfg.epsilon);
  CHECK(net.layers()[0].weights(0, 0) == doctest::Approx(w1 - d2).epsilon(1e-15));
}

TEST_CASE("adam is deterministic across identical nets") {
  MlpNetwork a = three_layer(Activation::Selu, Activation::Sigmoid, Activation::Identity);
  kaiming_init(a, 10);
  MlpNetwork b = a;
  const auto x = oracle::random_matrix(5, 4, 10);
  const auto g = oracle::random_matrix(5, 3, 11);
  for (auto* n : {&a, &b}) {
    (void)mlp_forward(*n, x);
    (void)mlp_backward(*n, g);
    adam_step(*n, AdamConfig{});
  }
  CHECK(a.same_parameters(b));
}

TEST_CASE("adam requires gradients and a valid config") {
  MlpNetwork net{{2, 1, Activation::Identity}};
  CHECK_THROWS_AS(adam_step(net, AdamConfig{}), StateError);
  (void)mlp_forward(net, RealMatrix(1, 2));
  (void)mlp_backward(net, RealMatrix(1, 1));
  CHECK_THROWS_AS(adam_step(net, AdamConfig{.beta1 = 1.0}), ConfigError);
  CHECK_THROWS_AS(adam_step(net, AdamConfig{.epsilon = 0.0}), ConfigError);
  CHECK_THROWS_AS(adam_step(net, AdamConfig{.learning_rate = -1.0}), ConfigError);
}

TEST_CASE("adam step resets the gradient accumulators") {
  MlpNetwork net{{2, 1, Activation::Identity}};
  (void)mlp_forward(net, RealMatrix{{1, 1}});
  (void)mlp_backward(net, RealMatrix{{1}});
  adam_step(net, AdamConfig{});
  CHECK_FALSE(net.has_gradients());
  for (auto block : net.gradient_blocks())
    for (double v : block) CHECK(v == 0.0);
}

TEST_CASE("init is deterministic per seed with zero biases") {
  MlpNetwork a = three_layer(Activation::Relu, Activation::Selu, Activation::Sigmoid);
  MlpNetwork b = a;
  kaiming_init(a, 77);
  kaiming_init(b, 77);
  CHECK(a.same_parameters(b));
  for (const auto& l : a.layers())
    for (double v : l.bias) CHECK(v == 0.0);
  kaiming_init(b, 78);
  CHECK_FALSE(a.same_parameters(b));
}

TEST_CASE("init variance follows fan-in") {
  auto variance = [](const RealMatrix& w) {
    double s = 0.0, s2 = 0.0;
    for (double v : w.flat()) {
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(w.size());
    return s2 / n - (s / n) * (s / n);
  };
  MlpNetwork relu{{1000, 1000, Activation::Relu}};
  kaiming_init(relu, 1);
  CHECK(std::abs(variance(relu.layers()[0].weights) - 2.0 / 1000) < 0.1 * 2.0 / 1000);
  MlpNetwork selu{{500, 400, Activation::Selu}};
  kaiming_init(selu, 2);
  CHECK(std::abs(variance(selu.layers()[0].weights) - 1.0 / 500) < 0.1 * 1.0 / 500);
}

TEST_CASE("moment shapes mirror parameters") {
  MlpNetwork net = three_layer(Activation::Selu, Activation::Selu, Activation::Identity);
  for (const auto& l : net.layers()) {
    CHECK(l.adam_m_weights.rows() == l.weights.rows());
    CHECK(l.adam_v_weights.cols() == l.weights.cols());
    CHECK(l.adam_m_bias.size() == l.bias.size());
    CHECK(l.adam_v_bias.size() == l.bias.size());
  }
}
