#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suffmdp/adnn.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/qlearn.hpp"
#include "suffmdp/serialize.hpp"

namespace suffmdp {

enum class FeatureMethod { raw, oracle, adnn, tnn, pca };

std::string to_string(FeatureMethod m);
FeatureMethod parse_feature_method(std::string_view name);

struct ExperimentConfig {
  std::vector<TransitionFunction> models{TransitionFunction::identity};
  std::vector<std::size_t> noise{0};
  std::size_t n = 30;
  std::size_t horizon = 90;
  std::size_t replicates = 20;
  std::vector<FeatureMethod> methods{FeatureMethod::raw, FeatureMethod::oracle,
                                     FeatureMethod::adnn, FeatureMethod::tnn, FeatureMethod::pca};
  OracleVariant oracle = OracleVariant::first4;
  std::vector<QKind> q_methods{QKind::linear, QKind::neural};
  ConstructConfig construct;
  SelectionConfig tnn;
  double pca_variance = 0.9;
  QConfig q;
  std::size_t rollouts = 100;
  std::size_t eval_horizon = 90;
  ValueDefinition definition = ValueDefinition::per_step_mean;
  std::uint64_t seed = 0;
  std::string output;         ///< results CSV; empty: not written
  std::string detail_output;  ///< per-replicate JSON; empty: not written
};

void to_json(Json& j, const ExperimentConfig& v);
void from_json(const Json& j, ExperimentConfig& v);

/// Outcome of one feature method on one replicate.
struct MethodOutcome {
  FeatureMethod method = FeatureMethod::raw;
  bool ok = false;
  std::string error;
  std::size_t n_var = 0;
  std::size_t n_dim = 0;
  std::size_t retries = 0;
  std::vector<std::optional<PolicyValue>> values;  ///< aligned with q_methods
};

struct ReplicateOutcome {
  TransitionFunction model = TransitionFunction::identity;
  std::size_t n_noise = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> methods;
};

/// One results row: model x noise x feature method.
struct ExperimentRow {
  TransitionFunction model = TransitionFunction::identity;
  std::size_t n_noise = 0;
  FeatureMethod method = FeatureMethod::raw;
  std::vector<double> q_mean;  ///< aligned with q_methods; NaN when no replicate succeeded
  std::vector<double> q_se;
  double n_var_mean = 0.0, n_var_se = 0.0;
  double n_dim_mean = 0.0, n_dim_se = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct ExperimentResult {
  std::vector<QKind> q_methods;
  std::vector<ExperimentRow> rows;
  std::vector<ReplicateOutcome> replicates;
};

/// Sample, build each feature map, fit each Q approximator and evaluate the
/// greedy policy on fresh rollouts, for every model, noise level and
/// replicate. Replicates run concurrently; results depend only on cfg.seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Feature map and its (nVar, nDim) for one method on one dataset.
struct MethodFeatures {
  FeatureMap map;
  std::size_t n_var = 0;
  std::size_t n_dim = 0;
};

MethodFeatures build_features(FeatureMethod method, const ExperimentConfig& cfg,
                              const GenerativeModelSpec& spec, const TrajectoryDataset& ds,
                              std::uint64_t seed);

std::string results_csv(const ExperimentResult& result);
Json results_json(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace suffmdp
