#include "nashae/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "nashae/errors.hpp"

namespace nashae {

double relative_error(double a, double b, double floor) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

GradientCheckResult gradient_check(MlpNetwork& net, const LossFn& loss, const RealMatrix& input,
                                   double h) {
  if (!(h > 0.0)) throw std::invalid_argument("gradient_check: h must be > 0");

  zero_grad(net);
  RealMatrix out = mlp_forward(net, input);
  RealMatrix out_grad(out.rows(), out.cols());
  loss(out, &out_grad);
  mlp_backward(net, out_grad, BackwardMode::ParamsOnly);

  std::vector<double> analytic;
  for (auto block : net.gradient_blocks()) analytic.insert(analytic.end(), block.begin(), block.end());
  zero_grad(net);

  GradientCheckResult result;
  std::size_t index = 0;
  for (auto block : net.parameter_blocks()) {
    for (double& p : block) {
      const double saved = p;
      p = saved + h;
      const double up = loss(mlp_predict(net, input), nullptr);
      p = saved - h;
      const double down = loss(mlp_predict(net, input), nullptr);
      p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = relative_error(analytic[index], numeric);
      const double abs_err = std::abs(analytic[index] - numeric);
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = index;
      }
      result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
      ++index;
    }
  }
  result.parameters_checked = index;
  return result;
}

LossFn half_mse_loss(RealMatrix target) {
  return [target = std::move(target)](const RealMatrix& out, RealMatrix* grad) {
    require_same_shape(out, target, "half_mse_loss");
    if (grad != nullptr && (grad->rows() != out.rows() || grad->cols() != out.cols())) {
      *grad = RealMatrix(out.rows(), out.cols());
    }
    const double k = static_cast<double>(out.rows());
    double sum = 0.0;
    auto o = out.flat();
    auto t = target.flat();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double d = o[i] - t[i];
      sum += d * d;
      if (grad != nullptr) grad->flat()[i] = d / k;
    }
    return 0.5 * sum / k;
  };
}

}  // namespace nashae
