#include "nashae/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nashae/errors.hpp"

namespace nashae {
namespace {

const double kSigmoidMax = std::nextafter(1.0, 0.0);
constexpr double kSigmoidMin = std::numeric_limits<double>::min();

}  // namespace

double activate(Activation kind, double pre) {
  switch (kind) {
    case Activation::Identity:
      return pre;
    case Activation::Sigmoid:
      // Split on sign so exp never overflows; clamp keeps the result in the open interval.
      if (pre >= 0.0) return std::min(1.0 / (1.0 + std::exp(-pre)), kSigmoidMax);
      {
        const double e = std::exp(pre);
        return std::max(e / (1.0 + e), kSigmoidMin);
      }
    case Activation::Selu:
      return pre > 0.0 ? kSeluScale * pre : kSeluScale * kSeluAlpha * std::expm1(pre);
    case Activation::Relu:
      return pre > 0.0 ? pre : 0.0;
  }
  return pre;
}

double activate_derivative(Activation kind, double pre) {
  switch (kind) {
    case Activation::Identity:
      return 1.0;
    case Activation::Sigmoid: {
      const double s = activate(Activation::Sigmoid, pre);
      return s * (1.0 - s);
    }
    case Activation::Selu:
      return pre > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(pre);
    case Activation::Relu:
      return pre > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

RealMatrix activation_forward(Activation kind, const RealMatrix& pre) {
  RealMatrix out(pre.rows(), pre.cols());
  if (kind == Activation::Identity) return pre;
  auto src = pre.flat();
  auto dst = out.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = activate(kind, src[i]);
  return out;
}

RealMatrix activation_backward(Activation kind, const RealMatrix& pre, const RealMatrix& upstream) {
  require_same_shape(pre, upstream, "activation_backward");
  if (kind == Activation::Identity) return upstream;
  RealMatrix out(pre.rows(), pre.cols());
  auto p = pre.flat();
  auto u = upstream.flat();
  auto dst = out.flat();
  for (std::size_t i = 0; i < p.size(); ++i) dst[i] = activate_derivative(kind, p[i]) * u[i];
  return out;
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Identity: return "identity";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Selu: return "selu";
    case Activation::Relu: return "relu";
  }
  return "unknown";
}

std::optional<Activation> activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "selu") return Activation::Selu;
  if (name == "relu") return Activation::Relu;
  return std::nullopt;
}

}  // namespace nashae
