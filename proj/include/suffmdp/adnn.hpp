#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "suffmdp/core.hpp"
#include "suffmdp/dcov.hpp"
#include "suffmdp/feature_map.hpp"
#include "suffmdp/network.hpp"
#include "suffmdp/screening.hpp"

namespace suffmdp {

/// Layer widths of the alternating network. The feature network maps
/// input_dim -> feature_hidden... -> feature_dim with the activation on every
/// layer; each action's head maps feature_dim -> head_hidden... -> output_dim
/// with the activation on all but its final (affine) layer.
struct Architecture {
  std::size_t input_dim = 0;
  std::size_t feature_dim = 1;
  std::size_t output_dim = 0;
  std::size_t n_actions = 1;
  std::vector<std::size_t> feature_hidden;
  std::vector<std::size_t> head_hidden;
  Activation activation = Activation::sigmoid;

  /// Hidden widths all equal to `width`, both networks `depth` layers deep.
  static Architecture from_tuning(std::size_t input_dim, std::size_t output_dim,
                                  std::size_t n_actions, std::size_t feature_dim,
                                  std::size_t width, std::size_t depth,
                                  Activation activation = Activation::sigmoid);

  void validate() const;
};

struct AdnnModel {
  Architecture architecture;
  std::vector<DenseLayer> feature_layers;        ///< theta_1
  std::vector<std::vector<DenseLayer>> heads;    ///< theta_{2,a}, index a - 1
  std::vector<std::vector<double>> trace;        ///< per cost check: cost restricted to each action
  std::size_t iterations = 0;
  bool converged = false;

  /// The learned feature map. `inputs` names the raw coordinates the model
  /// was trained on (identity when empty); `raw_dim` is the raw dimension.
  FeatureMap feature_map(std::vector<std::size_t> inputs = {}, std::size_t raw_dim = 0) const;
};

AdnnModel initialize_adnn(const Architecture& architecture, std::uint64_t seed);

Vector feature_forward(const AdnnModel& model, const Vector& state);
Vector adnn_forward(const AdnnModel& model, const Vector& state, int action);

/// Predicted Y for every row of the table (N x output_dim).
Matrix adnn_predict(const AdnnModel& model, const TransitionTable& table);

/// sum_j ||column j of the first feature weight||
double group_lasso_penalty(const Matrix& first_weight);

/// P_n sum_t ||prediction - Y||^2 + lambda * penalty.
double adnn_cost(const TransitionTable& table, const AdnnModel& model, double lambda);

struct AdnnGradient {
  int action = 0;
  std::vector<DenseLayer> feature;  ///< same shapes as model.feature_layers
  std::vector<DenseLayer> head;     ///< same shapes as model.heads[action - 1]
  double batch_loss = 0.0;          ///< unpenalized batch mean squared error
};

/// Subgradient of (1/|B|) sum_B ||prediction - Y||^2 + lambda * penalty with
/// respect to theta_1 and theta_{2,a}. Zero columns contribute a zero
/// penalty subgradient.
AdnnGradient adnn_subgradient(const TransitionTable& table, std::span<const std::size_t> rows,
                              const AdnnModel& model, double lambda, int action);
AdnnGradient adnn_subgradient(std::span<const Transition> batch, const AdnnModel& model,
                              double lambda, int action);

struct FitConfig {
  double lambda = 0.01;
  double batch_fraction = 0.1;
  double step0 = 0.05;
  double step_decay = 200.0;  ///< alpha_b = step0 / (1 + b / step_decay)
  double tolerance = 1e-5;
  std::size_t max_iterations = 5000;
  std::size_t cost_check_interval = 1;
  std::uint64_t seed = 0;

  double step(std::size_t iteration) const noexcept {
    return step0 / (1.0 + static_cast<double>(iteration) / step_decay);
  }
};

/// Alternating minibatch subgradient descent. Throws NumericalError when
/// the cost becomes non-finite.
AdnnModel fit_adnn(const TransitionTable& table, const Architecture& architecture,
                   const FitConfig& config);
AdnnModel fit_adnn(const TrajectoryDataset& ds, const Architecture& architecture,
                   const FitConfig& config);

// ---------------------------------------------------------------------------
// Tuning

struct TuningCell {
  std::size_t width = 4;   ///< K1
  std::size_t depth = 1;   ///< K2
  double lambda = 0.01;

  friend bool operator==(const TuningCell&, const TuningCell&) = default;
};

/// Cartesian product widths x depths x lambdas.
std::vector<TuningCell> tuning_grid(std::span<const std::size_t> widths,
                                    std::span<const std::size_t> depths,
                                    std::span<const double> lambdas);
std::vector<TuningCell> default_tuning_grid();

struct CvResult {
  TuningCell best;
  std::vector<TuningCell> cells;
  std::vector<double> scores;  ///< mean held-out squared error; NaN when not evaluated
};

/// Subject-level F-fold cross-validation over the grid. Ties go to the
/// smaller depth, then the smaller width, then the larger lambda. A
/// one-cell grid is returned without fitting.
CvResult cross_validate_adnn(const TransitionTable& table, std::size_t feature_dim,
                             std::span<const TuningCell> grid, std::size_t folds,
                             const FitConfig& config, std::uint64_t seed,
                             Activation activation = Activation::sigmoid);

// ---------------------------------------------------------------------------
// Sufficiency checks

/// Stratified dCov test of (Y - prediction) against S within action levels.
TestReport residual_independence_pvalue(const TransitionTable& table, const Matrix& predictions,
                                        const StratifiedTestConfig& config, std::uint64_t seed);
TestReport residual_independence_pvalue(const TransitionTable& table, const AdnnModel& model,
                                        const StratifiedTestConfig& config, std::uint64_t seed);

struct SelectionConfig {
  std::vector<std::size_t> dims;  ///< ascending; empty means 1..p
  std::vector<TuningCell> grid = default_tuning_grid();
  std::size_t folds = 5;
  FitConfig fit;
  StratifiedTestConfig test;
  Activation activation = Activation::sigmoid;
};

struct DimensionReport {
  std::size_t feature_dim = 0;
  TuningCell cell;
  std::vector<double> cv_scores;
  TestReport test;
};

struct DimensionSelection {
  std::size_t feature_dim = 0;
  AdnnModel model;
  std::vector<DimensionReport> reports;
  bool sufficient = false;  ///< false: no candidate passed, largest returned
};

/// Smallest candidate dimension whose fitted residuals pass the
/// independence test.
DimensionSelection select_feature_dimension(const TransitionTable& table,
                                            const SelectionConfig& config, std::uint64_t seed);

/// First-layer columns with norm above `relative_tolerance` times the
/// largest column norm.
std::vector<std::size_t> active_inputs(const AdnnModel& model, double relative_tolerance = 1e-3);

struct ConstructConfig {
  ScreenConfig screen;
  SelectionConfig selection;
  bool screen_first = true;
  std::size_t max_outer = 10;
  double column_tolerance = 1e-3;
};

struct ConstructIteration {
  std::vector<std::size_t> inputs;  ///< raw columns fed to the network
  std::size_t feature_dim = 0;
  bool sufficient = false;
  std::vector<std::size_t> active;  ///< raw columns with nonzero input weight
  std::vector<DimensionReport> reports;
};

struct SufficientFeatures {
  FeatureMap map;
  std::vector<std::size_t> variables;  ///< raw columns the map depends on
  std::size_t feature_dim = 0;
  ScreenResult screening;
  std::vector<ConstructIteration> iterations;
  std::optional<AdnnModel> model;
  bool empty = false;       ///< screening kept nothing: utility independent of state
  bool sufficient = false;  ///< last residual test failed to reject
};

/// Screening, then repeated dimension selection on the surviving raw
/// variables until the active input set stops shrinking.
SufficientFeatures construct_sufficient_features(const TrajectoryDataset& ds,
                                                 const ConstructConfig& config,
                                                 std::uint64_t seed);

}  // namespace suffmdp
