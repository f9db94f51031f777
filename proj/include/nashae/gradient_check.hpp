#pragma once

#include <cstddef>
#include <functional>

#include "nashae/matrix.hpp"
#include "nashae/mlp.hpp"

namespace nashae {

/// Scalar loss of a network output. When `output_grad` is non-null it
/// receives dLoss/doutput (same shape as `output`).
using LossFn = std::function<double(const RealMatrix& output, RealMatrix* output_grad)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t parameters_checked = 0;
};

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-8);

/// Compares backprop parameter gradients with central differences
/// (L(theta + h) - L(theta - h)) / 2h over every parameter of `net`.
/// Parameters are restored afterwards; existing gradients are discarded.
GradientCheckResult gradient_check(MlpNetwork& net, const LossFn& loss, const RealMatrix& input,
                                   double h = 1e-5);

/// Squared-error loss 0.5 * mean over rows of ||output - target||^2.
LossFn half_mse_loss(RealMatrix target);

}  // namespace nashae
