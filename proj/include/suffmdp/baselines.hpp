#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "suffmdp/adnn.hpp"
#include "suffmdp/core.hpp"
#include "suffmdp/feature_map.hpp"

namespace suffmdp {

struct PcaResult {
  FeatureMap map;
  std::size_t n_components = 0;
  Vector eigenvalues;  ///< descending
  Vector mean;
  Matrix components;   ///< k x p, orthonormal rows
};

/// Projection onto the leading principal components of the time-averaged
/// covariance T^-1 sum_t P_n (S^t - P_n S^t)(S^t - P_n S^t)^T, keeping the
/// smallest k whose eigenvalues explain at least `var_explained`.
PcaResult pca_feature_map(const TrajectoryDataset& ds, double var_explained = 0.9);

struct TnnActionFit {
  int action = 0;
  std::size_t feature_dim = 0;
  std::vector<std::size_t> variables;
  bool sufficient = false;
  AdnnModel model;
};

struct TnnResult {
  FeatureMap map;                      ///< concatenation of per-action feature maps
  std::vector<std::size_t> variables;  ///< union of per-action active inputs
  std::size_t feature_dim = 0;         ///< sum of per-action feature dimensions
  std::vector<TnnActionFit> actions;
};

/// A separate single-action sparse network per action on the raw state,
/// with the same tuning and dimension selection as the alternating network.
TnnResult fit_tnn(const TrajectoryDataset& ds, const SelectionConfig& config, std::uint64_t seed,
                  double column_tolerance = 1e-3);

}  // namespace suffmdp
