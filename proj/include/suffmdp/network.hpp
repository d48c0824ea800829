#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "suffmdp/core.hpp"
#include "suffmdp/error.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

/// Monotone squashing function R -> (0, 1).
enum class Activation { sigmoid, arctan };

inline double activate(Activation f, double z) noexcept {
  if (f == Activation::arctan) return 0.5 + std::atan(z) / std::numbers::pi;
  return 1.0 / (1.0 + std::exp(-z));
}

/// Derivative with respect to the pre-activation z, given value = activate(f, z).
inline double activate_derivative(Activation f, double z, double value) noexcept {
  if (f == Activation::arctan) return 1.0 / (std::numbers::pi * (1.0 + z * z));
  return value * (1.0 - value);
}

inline std::string to_string(Activation f) { return f == Activation::arctan ? "arctan" : "sigmoid"; }

inline Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "arctan") return Activation::arctan;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

/// z = W x + b with W of shape (out x in).
struct DenseLayer {
  Matrix weight;
  Vector bias;

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weight.rows()); }
};

/// Weights uniform on +-sqrt(6 / (fan_in + fan_out)), zero bias.
DenseLayer glorot_layer(std::size_t in, std::size_t out, Rng& rng);

/// Column-batched forward pass through layers that all apply the activation.
/// x is (in x batch); returns (out x batch).
Matrix squashed_forward(const std::vector<DenseLayer>& layers, Activation f, const Matrix& x);

}  // namespace suffmdp
