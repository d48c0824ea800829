#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "suffmdp/core.hpp"
#include "suffmdp/feature_map.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/network.hpp"

namespace suffmdp {

enum class QKind { linear, neural };

std::string to_string(QKind k);
QKind parse_q_kind(std::string_view name);

struct QConfig {
  double gamma = 0.9;
  std::size_t epochs = 100;
  double step0 = 0.1;        ///< divided by mean ||(1, phi)||^2 (linear) or 1 + hidden (neural)
  double step_decay = 20.0;  ///< alpha_e = step0 / (1 + e / step_decay), e = epoch
  std::size_t hidden = 10;   ///< neural hidden width
  Activation activation = Activation::sigmoid;
  bool standardize = true;   ///< centre and scale features with training moments
  std::uint64_t seed = 0;
};

/// Featurized batch transitions: row r holds (phi(S^t), A^t, U^t, phi(S^{t+1})).
struct QData {
  Matrix features;
  std::vector<int> actions;
  Vector utilities;
  Matrix next_features;
  std::size_t n_actions = 0;
};

QData make_q_data(const TransitionTable& table, const FeatureMap& map);

struct QApproximator {
  QKind kind = QKind::linear;
  double gamma = 0.9;
  std::size_t n_actions = 0;
  std::size_t feature_dim = 0;
  Vector feature_center;   ///< subtracted before the approximator
  Vector feature_scale;    ///< divides after centring
  Matrix linear;           ///< K x (1 + q), row a-1 = theta_a over (1, phi)
  std::vector<std::vector<DenseLayer>> networks;  ///< per action: hidden, output
  Activation activation = Activation::sigmoid;

  /// F(phi, a) for every action.
  Vector values(const Vector& feature) const;
  double value(const Vector& feature, int action) const;
};

/// Semi-gradient Q-learning theta += alpha (u + gamma max F(s', .) - F(s, a)) grad F
/// over shuffled epochs of the batch.
QApproximator fit_q_linear(const QData& data, const QConfig& config);
QApproximator fit_q_nn(const QData& data, const QConfig& config);
QApproximator fit_q(const QData& data, QKind kind, const QConfig& config);

/// argmax_a F(phi, a); ties go to the smallest action.
int greedy_action(const QApproximator& q, const Vector& feature);

enum class ValueDefinition { per_step_mean, discounted };

std::string to_string(ValueDefinition d);
ValueDefinition parse_value_definition(std::string_view name);

struct PolicyValue {
  double mean_outcome = 0.0;
  double std_error = 0.0;
  std::size_t n_rollouts = 0;
  std::size_t horizon = 0;
  ValueDefinition definition = ValueDefinition::per_step_mean;
  double gamma = 0.9;  ///< used by the discounted definition
  std::uint64_t seed = 0;
};

using Policy = std::function<int(const Vector& state, Rng& rng)>;

/// Fresh rollouts from the generative model following `policy`; each
/// rollout uses its own substream of `seed`.
PolicyValue evaluate_policy(const GenerativeModelSpec& spec, const Policy& policy,
                            std::size_t n_rollouts, std::size_t horizon, std::uint64_t seed,
                            ValueDefinition definition = ValueDefinition::per_step_mean,
                            double gamma = 0.9);

/// Greedy policy of q on the features map(S^t).
PolicyValue evaluate_policy(const GenerativeModelSpec& spec, const FeatureMap& map,
                            const QApproximator& q, std::size_t n_rollouts, std::size_t horizon,
                            std::uint64_t seed,
                            ValueDefinition definition = ValueDefinition::per_step_mean);

/// Uniform random actions.
Policy random_policy(std::size_t n_actions);

}  // namespace suffmdp
