#include "suffmdp/network.hpp"

namespace suffmdp {

DenseLayer glorot_layer(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer;
  layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  // Fill row by row so the draw order is independent of storage order.
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
  layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
  return layer;
}

Matrix squashed_forward(const std::vector<DenseLayer>& layers, Activation f, const Matrix& x) {
  Matrix h = x;
  for (const auto& layer : layers) {
    Matrix z = layer.weight * h;
    z.colwise() += layer.bias;
    h = z.unaryExpr([f](double v) { return activate(f, v); });
  }
  return h;
}

}  // namespace suffmdp
