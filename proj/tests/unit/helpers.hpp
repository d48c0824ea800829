#pragma once

#include <random>
#include <string>
#include <vector>

#include "suffmdp/core.hpp"

namespace testing {

inline suffmdp::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  suffmdp::Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = z(rng);
  return m;
}

/// n subjects, horizon T, p i.i.d. Gaussian columns, uniform actions in 1..K,
/// utility = coef * s_1 + noise.
inline suffmdp::TrajectoryDataset toy_dataset(std::size_t n, std::size_t T, std::size_t p,
                                              std::size_t K, std::uint64_t seed,
                                              double coef = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> act(1, static_cast<int>(K));
  std::vector<std::string> ids;
  std::vector<suffmdp::Matrix> states;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> utilities;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    states.push_back(random_matrix(rng, static_cast<Eigen::Index>(T + 1), static_cast<Eigen::Index>(p)));
    std::vector<int> a(T);
    std::vector<double> u(T);
    for (std::size_t t = 0; t < T; ++t) {
      a[t] = act(rng);
      u[t] = coef * states.back()(static_cast<Eigen::Index>(t), 0) + 0.1 * z(rng);
    }
    actions.push_back(a);
    utilities.push_back(u);
  }
  return suffmdp::TrajectoryDataset(ids, states, actions, utilities, K);
}

}  // namespace testing
