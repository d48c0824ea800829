#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suffmdp/core.hpp"

namespace suffmdp {

struct StratumResult {
  std::size_t time = 0;  ///< 1-based
  int action = 0;
  std::size_t sample_size = 0;
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Outcome of an independence test. For stratified tests `strata` holds the
/// per-(t, a) permutation tests and `time_p_values` the Bonferroni-combined
/// p-value of each tested time point; `p_value` is then the pooled value.
struct TestReport {
  std::string method;
  std::optional<double> statistic;
  double p_value = 1.0;
  std::vector<StratumResult> strata;
  std::vector<std::size_t> tested_times;
  std::vector<double> time_p_values;
  std::size_t pooled_u = 1;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  double level = 0.1;
  bool reject = false;
  bool degenerate = false;  ///< no test was possible; p_value forced to 1
  std::optional<double> degrees_of_freedom;
};

/// Double-centered Euclidean distance matrix of the rows of x.
Matrix double_centered_distances(const Matrix& x);

/// Empirical squared distance covariance V^2_m(X, Y) = m^-2 sum_jk A_jk B_jk.
double dcov_statistic(const Matrix& x, const Matrix& y);

/// Permutation p-value (1 + #{b : T_b >= T}) / (B + 1), rows of y permuted.
TestReport dcov_permutation_pvalue(const Matrix& x, const Matrix& y, std::size_t permutations,
                                   std::uint64_t seed);

/// G-test of independence on an r x c contingency table of counts.
TestReport lrt_contingency_pvalue(const Matrix& counts);

/// G-test on paired discrete observations; each distinct row is one level.
TestReport lrt_independence_pvalue(const Matrix& x, const Matrix& y);

/// Ruger's order-statistic combination: min(1, T p_(u) / u).
double pooled_pvalue(std::span<const double> p_values, std::size_t u);

/// floor(T / 20 + 1)
constexpr std::size_t default_pool_order(std::size_t horizon) noexcept { return horizon / 20 + 1; }

struct StratifiedTestConfig {
  double level = 0.1;
  std::size_t permutations = 999;
  std::size_t min_stratum = 5;
  std::optional<std::size_t> pool_order;  ///< defaults to floor(T'/20 + 1), T' = tested times
};

/// Paired features observed on transitions, labelled by time and action.
struct StratifiedSample {
  Matrix g;  ///< N x d1
  Matrix h;  ///< N x d2
  std::vector<std::size_t> times;
  std::vector<int> actions;
};

/// Per-(t, a) dCov permutation tests, Bonferroni across actions within each
/// time point, Ruger pooling across time points.
TestReport stratified_pooled_test(const StratifiedSample& sample, const StratifiedTestConfig& config,
                                  std::uint64_t seed);

using StepFeature = std::function<Vector(const TrajectoryDataset&, std::size_t subject,
                                         std::size_t time)>;

TestReport stratified_pooled_test(const TrajectoryDataset& ds, const StepFeature& g,
                                  const StepFeature& h, const StratifiedTestConfig& config,
                                  std::uint64_t seed);

}  // namespace suffmdp
