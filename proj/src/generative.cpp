#include "suffmdp/generative.hpp"

#include <numeric>
#include <vector>

#include "suffmdp/error.hpp"

namespace suffmdp {

namespace {

// Block law shared by the signal and dependent-noise variables: column j
// (0-based within the block) is driven by column j / 4 of the same block.
void block_step(TransitionFunction g, const Vector& cur, Eigen::Index offset, Eigen::Index size,
                bool a, Vector& next, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  for (Eigen::Index j = 0; j < size; ++j) {
    const double driver = apply_transition(g, cur(offset + j / 4));
    const bool first_pair = (j % 4) < 2;
    // First pair follows the driver when A = 0, second pair when A = 1.
    const bool tight = first_pair ? !a : a;
    const double mean = tight ? driver : 0.0;
    const double sd = tight ? 0.1 : 0.5;
    next(offset + j) = mean + sd * z(rng);
  }
}

}  // namespace

Vector initial_state(const GenerativeModelSpec& spec, Rng& rng) {
  std::normal_distribution<double> z(0.0, 0.5);
  Vector s(static_cast<Eigen::Index>(spec.state_dim()));
  for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = z(rng);
  return s;
}

double mean_utility(const GenerativeModelSpec& spec, const Vector& state, int action) {
  if (action != 1 && action != 2) throw ValidationError("simulation model has actions 1 and 2");
  const double lo = apply_transition(spec.g, state(0)) + apply_transition(spec.g, state(1));
  const double hi = apply_transition(spec.g, state(2)) + apply_transition(spec.g, state(3));
  return action == 1 ? 2.0 * lo - hi : 2.0 * hi - lo;
}

StepOutcome simulate_step(const GenerativeModelSpec& spec, const Vector& state, int action,
                          Rng& rng) {
  if (static_cast<std::size_t>(state.size()) != spec.state_dim())
    throw ValidationError("state dimension does not match the model");
  const double mu = mean_utility(spec, state, action);
  const bool a = action == 2;
  StepOutcome out;
  out.next_state.resize(state.size());
  const auto sig = static_cast<Eigen::Index>(GenerativeModelSpec::signal_dim);
  const auto dep = static_cast<Eigen::Index>(spec.n_dependent());
  const auto white = static_cast<Eigen::Index>(spec.n_white());
  block_step(spec.g, state, 0, sig, a, out.next_state, rng);
  block_step(spec.g, state, sig, dep, a, out.next_state, rng);
  std::normal_distribution<double> w(0.0, 0.5);
  for (Eigen::Index j = 0; j < white; ++j) out.next_state(sig + dep + j) = w(rng);
  const Eigen::Index c0 = sig + dep + white;
  out.next_state.tail(state.size() - c0) = state.tail(state.size() - c0);
  std::normal_distribution<double> u(0.0, 0.1);
  out.utility = mu + u(rng);
  return out;
}

TrajectoryDataset sample_trajectories(const GenerativeModelSpec& spec, std::size_t n,
                                      std::size_t horizon, std::uint64_t seed) {
  if (n == 0 || horizon == 0) throw ValidationError("simulate: n and T must be >= 1");
  const auto p = static_cast<Eigen::Index>(spec.state_dim());
  std::vector<std::string> ids(n);
  std::vector<Matrix> states(n);
  std::vector<std::vector<int>> actions(n, std::vector<int>(horizon));
  std::vector<std::vector<double>> utilities(n, std::vector<double>(horizon));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = std::to_string(i + 1);
    Rng rng = make_rng(seed, {stream::kSubject, i});
    Matrix& s = states[i];
    s.resize(static_cast<Eigen::Index>(horizon + 1), p);
    Vector cur = initial_state(spec, rng);
    s.row(0) = cur.transpose();
    for (std::size_t t = 0; t < horizon; ++t) {
      const int a = coin(rng) ? 2 : 1;
      StepOutcome step = simulate_step(spec, cur, a, rng);
      actions[i][t] = a;
      utilities[i][t] = step.utility;
      cur = std::move(step.next_state);
      s.row(static_cast<Eigen::Index>(t + 1)) = cur.transpose();
    }
  }
  return TrajectoryDataset(std::move(ids), std::move(states), std::move(actions),
                           std::move(utilities), 2);
}

std::string to_string(OracleVariant v) {
  switch (v) {
    case OracleVariant::first16: return "first16";
    case OracleVariant::nonlinear3: return "nonlinear3";
    case OracleVariant::first4: break;
  }
  return "first4";
}

OracleVariant parse_oracle_variant(std::string_view name) {
  if (name == "first4") return OracleVariant::first4;
  if (name == "first16") return OracleVariant::first16;
  if (name == "nonlinear3") return OracleVariant::nonlinear3;
  throw ValidationError("unknown oracle variant '" + std::string(name) + "'");
}

FeatureMap oracle_feature_map(const GenerativeModelSpec& spec, OracleVariant variant) {
  const std::size_t p = spec.state_dim();
  if (variant == OracleVariant::nonlinear3)
    return FeatureMap(p, {NonlinearOracleComponent{spec.g}});
  std::vector<std::size_t> cols(variant == OracleVariant::first4 ? 4 : 16);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return FeatureMap(p, {SelectionComponent{std::move(cols)}});
}

}  // namespace suffmdp
