#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "suffmdp/core.hpp"
#include "suffmdp/dcov.hpp"

namespace suffmdp {

struct ScreenConfig {
  double level = 0.1;
  std::optional<std::size_t> max_rounds;  ///< defaults to the state dimension
  std::size_t permutations = 999;
  std::size_t min_stratum = 5;
};

struct ScreenRound {
  std::size_t round = 0;  ///< 1-based
  std::vector<std::size_t> tested;
  std::vector<double> pooled_p;
  std::vector<std::size_t> added;
};

/// Selected state columns (0-based, ascending) plus the full round trace.
struct ScreenResult {
  std::vector<std::size_t> selected;
  std::vector<ScreenRound> rounds;
  double level = 0.1;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  bool converged = false;
};

/// Iterative screening: starting from J = {}, add every column j whose S_j^t
/// is dependent on (U^t, S_J^{t+1}) within levels of A^t, until J stops
/// growing. Each (round, j) test uses its own seeded substream.
ScreenResult screen(const TrajectoryDataset& ds, const ScreenConfig& config, std::uint64_t seed);

}  // namespace suffmdp
