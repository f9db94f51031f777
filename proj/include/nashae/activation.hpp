#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nashae/matrix.hpp"

namespace nashae {

enum class Activation { Identity = 0, Sigmoid = 1, Selu = 2, Relu = 3 };

// Self-normalizing constants (Klambauer et al.).
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSeluScale = 1.0507009873554804934193349852946;

double activate(Activation kind, double pre);
/// d activate / d pre, evaluated at `pre`.
double activate_derivative(Activation kind, double pre);

RealMatrix activation_forward(Activation kind, const RealMatrix& pre);
/// Elementwise derivative at `pre` times `upstream`.
RealMatrix activation_backward(Activation kind, const RealMatrix& pre, const RealMatrix& upstream);

std::string_view to_string(Activation kind);
std::optional<Activation> activation_from_string(std::string_view name);

}  // namespace nashae
