#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "suffmdp/core.hpp"
#include "suffmdp/feature_map.hpp"
#include "suffmdp/rng.hpp"
#include "suffmdp/transition_function.hpp"

namespace suffmdp {

/// Simulation model: 64 signal variables whose first 16 drive the next
/// state and whose first 4 drive the utility, plus m noise variables split
/// into floor(m/3) dependent, ceil(m/3) white and ceil(m/3) constant.
/// State columns are ordered [signal, dependent, white, constant].
struct GenerativeModelSpec {
  static constexpr std::size_t signal_dim = 64;

  TransitionFunction g = TransitionFunction::identity;
  std::size_t n_noise = 0;
  std::uint64_t seed = 0;

  std::size_t n_dependent() const noexcept { return n_noise / 3; }
  std::size_t n_white() const noexcept { return (n_noise + 2) / 3; }
  std::size_t n_constant() const noexcept { return (n_noise + 2) / 3; }
  std::size_t state_dim() const noexcept {
    return signal_dim + n_dependent() + n_white() + n_constant();
  }
};

/// S^1: every column i.i.d. N(0, 0.25).
Vector initial_state(const GenerativeModelSpec& spec, Rng& rng);

/// Conditional mean of U^t given S^t = state and action (1 or 2).
double mean_utility(const GenerativeModelSpec& spec, const Vector& state, int action);

struct StepOutcome {
  double utility = 0.0;
  Vector next_state;
};

/// One transition from `state` under action 1 (A = 0) or 2 (A = 1).
StepOutcome simulate_step(const GenerativeModelSpec& spec, const Vector& state, int action,
                          Rng& rng);

/// n subjects of horizon T with Bernoulli(0.5) actions; subject i draws
/// from its own substream of `seed`.
TrajectoryDataset sample_trajectories(const GenerativeModelSpec& spec, std::size_t n,
                                      std::size_t horizon, std::uint64_t seed);
inline TrajectoryDataset sample_trajectories(const GenerativeModelSpec& spec, std::size_t n,
                                             std::size_t horizon) {
  return sample_trajectories(spec, n, horizon, spec.seed);
}

enum class OracleVariant { first4, first16, nonlinear3 };

std::string to_string(OracleVariant v);
OracleVariant parse_oracle_variant(std::string_view name);

/// Known sufficient maps: (s_1..s_4), (s_1..s_16) or
/// (g(s_1), g(s_2), g(s_3) + g(s_4)).
FeatureMap oracle_feature_map(const GenerativeModelSpec& spec, OracleVariant variant);

}  // namespace suffmdp
