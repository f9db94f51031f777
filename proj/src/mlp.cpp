#include "nashae/mlp.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "nashae/errors.hpp"
#include "nashae/rng.hpp"

namespace nashae {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be > 0");
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : activation(act),
      weights(out, in),
      bias(out, 0.0),
      grad_weights(out, in),
      grad_bias(out, 0.0),
      adam_m_weights(out, in),
      adam_v_weights(out, in),
      adam_m_bias(out, 0.0),
      adam_v_bias(out, 0.0) {
  if (in == 0 || out == 0) throw ShapeError("DenseLayer: zero-sized layer");
}

namespace {

RealMatrix affine(const DenseLayer& layer, const RealMatrix& input) {
  if (input.cols() != layer.in_size()) {
    throw ShapeError("dense layer expects " + std::to_string(layer.in_size()) +
                     " input columns, got " + input.shape_string());
  }
  RealMatrix pre = matmul_transpose_b(input, layer.weights);
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    auto row = pre.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
  return pre;
}

}  // namespace

RealMatrix DenseLayer::forward(const RealMatrix& input) {
  RealMatrix pre = affine(*this, input);
  RealMatrix out = activation_forward(activation, pre);
  cached_input = input;
  cached_pre = std::move(pre);
  has_cache = true;
  return out;
}

RealMatrix DenseLayer::predict(const RealMatrix& input) const {
  return activation_forward(activation, affine(*this, input));
}

RealMatrix DenseLayer::backward(const RealMatrix& upstream, bool want_input_grad,
                                bool accumulate_params) {
  if (!has_cache) throw StateError("dense layer backward called before forward");
  if (upstream.rows() != cached_pre.rows() || upstream.cols() != out_size()) {
    throw ShapeError("dense layer backward: upstream " + upstream.shape_string() +
                     " does not match output " + cached_pre.shape_string());
  }
  const RealMatrix dpre = activation_backward(activation, cached_pre, upstream);
  if (accumulate_params) {
    matmul_transpose_a_accumulate(dpre, cached_input, grad_weights);
    for (std::size_t r = 0; r < dpre.rows(); ++r) {
      auto row = dpre.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) grad_bias[c] += row[c];
    }
  }
  if (!want_input_grad) return {};
  return matmul(dpre, weights);
}

MlpNetwork::MlpNetwork(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ShapeError("MlpNetwork: no layers");
  layers_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i > 0 && specs[i].in != specs[i - 1].out) {
      throw ShapeError("MlpNetwork: layer " + std::to_string(i) + " input " +
                       std::to_string(specs[i].in) + " does not chain with previous output " +
                       std::to_string(specs[i - 1].out));
    }
    layers_.emplace_back(specs[i].in, specs[i].out, specs[i].activation);
  }
}

MlpNetwork::MlpNetwork(std::initializer_list<LayerSpec> specs)
    : MlpNetwork(std::span<const LayerSpec>(specs.begin(), specs.size())) {}

std::size_t MlpNetwork::input_size() const {
  return layers_.empty() ? 0 : layers_.front().in_size();
}

std::size_t MlpNetwork::output_size() const {
  return layers_.empty() ? 0 : layers_.back().out_size();
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<LayerSpec> MlpNetwork::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back({l.in_size(), l.out_size(), l.activation});
  return out;
}

std::vector<std::span<double>> MlpNetwork::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  for (auto& l : layers_) {
    blocks.emplace_back(l.weights.flat());
    blocks.emplace_back(l.bias);
  }
  return blocks;
}

std::vector<std::span<const double>> MlpNetwork::parameter_blocks() const {
  std::vector<std::span<const double>> blocks;
  for (const auto& l : layers_) {
    blocks.emplace_back(l.weights.flat());
    blocks.emplace_back(l.bias);
  }
  return blocks;
}

std::vector<std::span<double>> MlpNetwork::gradient_blocks() {
  std::vector<std::span<double>> blocks;
  for (auto& l : layers_) {
    blocks.emplace_back(l.grad_weights.flat());
    blocks.emplace_back(l.grad_bias);
  }
  return blocks;
}

bool MlpNetwork::same_parameters(const MlpNetwork& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || !(a.weights == b.weights)) return false;
    if (a.bias.size() != b.bias.size() ||
        std::memcmp(a.bias.data(), b.bias.data(), a.bias.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

RealMatrix mlp_forward(MlpNetwork& net, const RealMatrix& input) {
  RealMatrix h = input;
  for (auto& layer : net.layers()) h = layer.forward(h);
  return h;
}

RealMatrix mlp_predict(const MlpNetwork& net, const RealMatrix& input) {
  RealMatrix h = input;
  for (const auto& layer : net.layers()) h = layer.predict(h);
  return h;
}

RealMatrix mlp_backward(MlpNetwork& net, const RealMatrix& output_grad, BackwardMode mode) {
  auto& layers = net.layers();
  if (layers.empty()) throw StateError("mlp_backward on empty network");
  const bool params = mode != BackwardMode::InputOnly;
  RealMatrix g = output_grad;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const bool want_input = i > 0 || mode != BackwardMode::ParamsOnly;
    g = layers[i].backward(g, want_input, params);
  }
  if (params) net.mark_gradients(true);
  return g;
}

void zero_grad(MlpNetwork& net) {
  for (auto block : net.gradient_blocks()) std::fill(block.begin(), block.end(), 0.0);
  net.mark_gradients(false);
}

namespace {

using ArrayMap = Eigen::Map<Eigen::ArrayXd>;

ArrayMap as_array(std::span<double> s) {
  return ArrayMap(s.data(), static_cast<Eigen::Index>(s.size()));
}

void adam_update(std::span<double> param, std::span<double> grad, std::span<double> m,
                 std::span<double> v, const AdamConfig& cfg, double bc1, double bc2) {
  auto p = as_array(param);
  auto g = as_array(grad);
  auto mm = as_array(m);
  auto vv = as_array(v);
  mm = cfg.beta1 * mm + (1.0 - cfg.beta1) * g;
  vv = cfg.beta2 * vv + (1.0 - cfg.beta2) * g.square();
  p -= cfg.learning_rate * (mm / bc1) / ((vv / bc2).sqrt() + cfg.epsilon);
}

}  // namespace

void adam_step(MlpNetwork& net, const AdamConfig& cfg) {
  if (!net.has_gradients()) throw StateError("adam_step: no gradients present");
  cfg.validate();
  net.set_step_count(net.step_count() + 1);
  const double t = static_cast<double>(net.step_count());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& l : net.layers()) {
    adam_update(l.weights.flat(), l.grad_weights.flat(), l.adam_m_weights.flat(),
                l.adam_v_weights.flat(), cfg, bc1, bc2);
    adam_update(l.bias, l.grad_bias, l.adam_m_bias, l.adam_v_bias, cfg, bc1, bc2);
  }
  zero_grad(net);
}

void kaiming_init(MlpNetwork& net, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : net.layers()) {
    const double gain = l.activation == Activation::Relu ? 2.0 : 1.0;
    std::normal_distribution<double> dist(0.0, std::sqrt(gain / static_cast<double>(l.in_size())));
    for (double& w : l.weights.flat()) w = dist(rng);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
    l.adam_m_weights.fill(0.0);
    l.adam_v_weights.fill(0.0);
    std::fill(l.adam_m_bias.begin(), l.adam_m_bias.end(), 0.0);
    std::fill(l.adam_v_bias.begin(), l.adam_v_bias.end(), 0.0);
    l.has_cache = false;
  }
  zero_grad(net);
  net.set_step_count(0);
}

}  // namespace nashae
