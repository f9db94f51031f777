#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nashae/activation.hpp"
#include "nashae/matrix.hpp"

namespace nashae {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws ConfigError if any field is outside its valid range.
  void validate() const;
};

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::Identity;
};

/// Fully connected layer computing activation(input * W^T + b).
///
/// Weights are stored out x in. Gradients accumulate across backward
/// calls until the owning network takes an optimizer step or zero_grad().
struct DenseLayer {
  DenseLayer(std::size_t in, std::size_t out, Activation activation);

  std::size_t in_size() const { return weights.cols(); }
  std::size_t out_size() const { return weights.rows(); }

  RealMatrix forward(const RealMatrix& input);
  /// Forward without touching the backward cache.
  RealMatrix predict(const RealMatrix& input) const;
  /// Returns dL/dinput (empty matrix when `want_input_grad` is false).
  RealMatrix backward(const RealMatrix& upstream, bool want_input_grad, bool accumulate_params);

  Activation activation;
  RealMatrix weights;
  AlignedVector bias;

  RealMatrix grad_weights;
  AlignedVector grad_bias;

  RealMatrix adam_m_weights;
  RealMatrix adam_v_weights;
  AlignedVector adam_m_bias;
  AlignedVector adam_v_bias;

  RealMatrix cached_input;
  RealMatrix cached_pre;
  bool has_cache = false;
};

class MlpNetwork {
 public:
  MlpNetwork() = default;
  explicit MlpNetwork(std::span<const LayerSpec> specs);
  MlpNetwork(std::initializer_list<LayerSpec> specs);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;
  std::vector<LayerSpec> specs() const;

  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t t) { step_count_ = t; }

  bool has_gradients() const { return has_gradients_; }
  void mark_gradients(bool present) { has_gradients_ = present; }

  /// Parameters flattened in layer order: weights then bias per layer.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  /// Gradient blocks in the same order as parameter_blocks().
  std::vector<std::span<double>> gradient_blocks();

  /// True when every parameter is bit-identical.
  bool same_parameters(const MlpNetwork& other) const;

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t step_count_ = 0;
  bool has_gradients_ = false;
};

enum class BackwardMode {
  Full,        ///< parameter gradients and input gradient
  ParamsOnly,  ///< skip the first layer's input gradient
  InputOnly,   ///< leave parameter gradients untouched
};

/// Batch forward pass, one row per sample. Caches what backward needs.
RealMatrix mlp_forward(MlpNetwork& net, const RealMatrix& input);
/// Cache-free forward pass for evaluation.
RealMatrix mlp_predict(const MlpNetwork& net, const RealMatrix& input);
/// Backpropagates dL/doutput. Parameter gradients accumulate in the layers.
RealMatrix mlp_backward(MlpNetwork& net, const RealMatrix& output_grad,
                        BackwardMode mode = BackwardMode::Full);

void zero_grad(MlpNetwork& net);

/// One Adam update with bias correction; increments step_count and clears
/// gradients. Throws StateError when no backward pass populated gradients.
void adam_step(MlpNetwork& net, const AdamConfig& cfg);

/// Zero-mean normal weights, zero biases. Variance 2/fan_in for ReLU
/// layers and 1/fan_in for everything else (LeCun normal, which SELU needs
/// to self-normalize). Also resets Adam moments and step_count.
void kaiming_init(MlpNetwork& net, std::uint64_t seed);

}  // namespace nashae
