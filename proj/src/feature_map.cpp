#include "suffmdp/feature_map.hpp"

#include <algorithm>
#include <set>

#include "suffmdp/error.hpp"

namespace suffmdp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Matrix gather_columns(const Matrix& states, const std::vector<std::size_t>& inputs) {
  Matrix out(states.rows(), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t j = 0; j < inputs.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = states.col(static_cast<Eigen::Index>(inputs[j]));
  return out;
}

void check_inputs(const std::vector<std::size_t>& inputs, std::size_t input_dim) {
  for (std::size_t j : inputs)
    if (j >= input_dim) throw ValidationError("feature map: input index out of range");
}

}  // namespace

std::size_t component_output_dim(const FeatureMap::Component& c) {
  return std::visit(
      overloaded{
          [](const SelectionComponent& s) { return s.inputs.size(); },
          [](const NetworkComponent& n) {
            return n.layers.empty() ? n.inputs.size() : n.layers.back().out_dim();
          },
          [](const LinearComponent& l) { return static_cast<std::size_t>(l.projection.rows()); },
          [](const NonlinearOracleComponent&) { return std::size_t{3}; },
      },
      c);
}

FeatureMap::FeatureMap(std::size_t input_dim, std::vector<Component> components)
    : input_dim_(input_dim), components_(std::move(components)) {
  for (const auto& c : components_) {
    std::visit(overloaded{
                   [&](const SelectionComponent& s) { check_inputs(s.inputs, input_dim_); },
                   [&](const NetworkComponent& n) {
                     check_inputs(n.inputs, input_dim_);
                     std::size_t width = n.inputs.size();
                     for (const auto& layer : n.layers) {
                       if (layer.in_dim() != width ||
                           static_cast<std::size_t>(layer.bias.size()) != layer.out_dim())
                         throw ValidationError("feature map: inconsistent layer shapes");
                       width = layer.out_dim();
                     }
                   },
                   [&](const LinearComponent& l) {
                     if (static_cast<std::size_t>(l.projection.cols()) != input_dim_ ||
                         static_cast<std::size_t>(l.center.size()) != input_dim_)
                       throw ValidationError("feature map: projection shape mismatch");
                   },
                   [&](const NonlinearOracleComponent&) {
                     if (input_dim_ < 4)
                       throw ValidationError("feature map: oracle needs at least 4 inputs");
                   },
               },
               c);
    output_dim_ += component_output_dim(c);
  }
}

FeatureMap FeatureMap::identity(std::size_t dim) {
  std::vector<std::size_t> all(dim);
  for (std::size_t j = 0; j < dim; ++j) all[j] = j;
  return FeatureMap(dim, {SelectionComponent{std::move(all)}});
}

Matrix FeatureMap::apply_rows(const Matrix& states) const {
  if (static_cast<std::size_t>(states.cols()) != input_dim_)
    throw ValidationError("feature map: expected input dimension " + std::to_string(input_dim_) +
                          ", got " + std::to_string(states.cols()));
  Matrix out(states.rows(), static_cast<Eigen::Index>(output_dim_));
  Eigen::Index col = 0;
  for (const auto& c : components_) {
    const auto width = static_cast<Eigen::Index>(component_output_dim(c));
    std::visit(overloaded{
                   [&](const SelectionComponent& s) {
                     out.middleCols(col, width) = gather_columns(states, s.inputs);
                   },
                   [&](const NetworkComponent& n) {
                     const Matrix x = gather_columns(states, n.inputs).transpose();
                     out.middleCols(col, width) =
                         squashed_forward(n.layers, n.activation, x).transpose();
                   },
                   [&](const LinearComponent& l) {
                     out.middleCols(col, width) =
                         (states.rowwise() - l.center.transpose()) * l.projection.transpose();
                   },
                   [&](const NonlinearOracleComponent& o) {
                     auto g = [&](Eigen::Index j) {
                       return states.col(j).unaryExpr(
                           [&](double v) { return apply_transition(o.g, v); });
                     };
                     out.col(col) = g(0);
                     out.col(col + 1) = g(1);
                     out.col(col + 2) = g(2) + g(3);
                   },
               },
               c);
    col += width;
  }
  return out;
}

Vector FeatureMap::apply(const Vector& s) const { return apply_rows(s.transpose()).row(0).transpose(); }

std::vector<std::size_t> FeatureMap::inputs_used(double relative_tolerance) const {
  std::set<std::size_t> used;
  for (const auto& c : components_) {
    std::visit(overloaded{
                   [&](const SelectionComponent& s) { used.insert(s.inputs.begin(), s.inputs.end()); },
                   [&](const NetworkComponent& n) {
                     if (n.layers.empty()) {
                       used.insert(n.inputs.begin(), n.inputs.end());
                       return;
                     }
                     for (std::size_t j : active_columns(n.layers.front().weight, relative_tolerance))
                       used.insert(n.inputs[j]);
                   },
                   [&](const LinearComponent& l) {
                     for (std::size_t j : active_columns(l.projection, relative_tolerance))
                       used.insert(j);
                   },
                   [&](const NonlinearOracleComponent&) {
                     for (std::size_t j = 0; j < 4; ++j) used.insert(j);
                   },
               },
               c);
  }
  return {used.begin(), used.end()};
}

Vector column_norms(const Matrix& weight) { return weight.colwise().norm().transpose(); }

std::vector<std::size_t> active_columns(const Matrix& weight, double relative_tolerance) {
  const Vector norms = column_norms(weight);
  std::vector<std::size_t> active;
  if (norms.size() == 0) return active;
  const double threshold = relative_tolerance * norms.maxCoeff();
  for (Eigen::Index j = 0; j < norms.size(); ++j)
    if (norms(j) > threshold) active.push_back(static_cast<std::size_t>(j));
  return active;
}

}  // namespace suffmdp
