#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "suffmdp/core.hpp"
#include "suffmdp/network.hpp"
#include "suffmdp/transition_function.hpp"

namespace suffmdp {

/// Coordinate selection s -> s_J.
struct SelectionComponent {
  std::vector<std::size_t> inputs;
};

/// Squashed network applied to the selected coordinates: every layer
/// (including the last) applies the activation.
struct NetworkComponent {
  std::vector<std::size_t> inputs;
  std::vector<DenseLayer> layers;
  Activation activation = Activation::sigmoid;
};

/// s -> P (s - center); rows of P are the projection directions.
struct LinearComponent {
  Vector center;
  Matrix projection;
};

/// s -> (g(s_1), g(s_2), g(s_3) + g(s_4)).
struct NonlinearOracleComponent {
  TransitionFunction g = TransitionFunction::identity;
};

/// A map from R^p to R^q built from concatenated components. An empty map
/// (no components) has output dimension 0.
class FeatureMap {
 public:
  using Component =
      std::variant<SelectionComponent, NetworkComponent, LinearComponent, NonlinearOracleComponent>;

  FeatureMap() = default;
  FeatureMap(std::size_t input_dim, std::vector<Component> components);

  static FeatureMap identity(std::size_t dim);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  bool empty() const noexcept { return components_.empty(); }
  const std::vector<Component>& components() const noexcept { return components_; }

  Vector apply(const Vector& s) const;
  /// Row-wise application: (N x p) -> (N x q).
  Matrix apply_rows(const Matrix& states) const;

  /// Raw coordinates the output can depend on. Network columns whose norm
  /// is <= tolerance * (largest column norm of that layer) are excluded.
  std::vector<std::size_t> inputs_used(double relative_tolerance = 0.0) const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<Component> components_;
};

std::size_t component_output_dim(const FeatureMap::Component& c);

/// Group norms of the first-layer columns, one per input.
Vector column_norms(const Matrix& weight);

/// Indices j with ||column j|| > tolerance * max_j ||column j|| (strictly
/// positive norm when tolerance is 0).
std::vector<std::size_t> active_columns(const Matrix& weight, double relative_tolerance);

}  // namespace suffmdp
