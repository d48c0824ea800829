#include "suffmdp/screening.hpp"

#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

ScreenResult screen(const TrajectoryDataset& ds, const ScreenConfig& config, std::uint64_t seed) {
  if (!(config.level > 0.0 && config.level < 1.0))
    throw ValidationError("screen: level must lie in (0, 1)");
  const std::size_t p = ds.state_dim();
  const std::size_t max_rounds = config.max_rounds.value_or(p);
  if (max_rounds == 0) throw ValidationError("screen: max_rounds must be >= 1");

  const TransitionTable table = make_transition_table(ds);
  const StratifiedTestConfig test_config{config.level, config.permutations, config.min_stratum,
                                         std::nullopt};

  ScreenResult result;
  result.level = config.level;
  result.permutations = config.permutations;
  result.seed = seed;

  std::vector<bool> in_set(p, false);
  std::vector<std::size_t> selected;
  for (std::size_t k = 1; k <= max_rounds; ++k) {
    // Y_J^{t+1} = (U^t, S_J^{t+1}) for the set fixed at the start of the round.
    StratifiedSample base;
    base.times = table.times;
    base.actions = table.actions;
    base.h.resize(table.responses.rows(), static_cast<Eigen::Index>(1 + selected.size()));
    base.h.col(0) = table.responses.col(0);
    for (std::size_t c = 0; c < selected.size(); ++c)
      base.h.col(static_cast<Eigen::Index>(c + 1)) =
          table.responses.col(static_cast<Eigen::Index>(selected[c] + 1));

    ScreenRound round;
    round.round = k;
    for (std::size_t j = 0; j < p; ++j)
      if (!in_set[j]) round.tested.push_back(j);
    round.pooled_p.resize(round.tested.size());

    parallel_for(round.tested.size(), [&](std::size_t idx) {
      const std::size_t j = round.tested[idx];
      StratifiedSample sample;
      sample.g = table.states.col(static_cast<Eigen::Index>(j));
      sample.h = base.h;
      sample.times = base.times;
      sample.actions = base.actions;
      const std::uint64_t test_seed = derive_seed(seed, {stream::kScreen, k, j});
      round.pooled_p[idx] = stratified_pooled_test(sample, test_config, test_seed).p_value;
    });

    for (std::size_t idx = 0; idx < round.tested.size(); ++idx)
      if (round.pooled_p[idx] <= config.level) round.added.push_back(round.tested[idx]);
    for (std::size_t j : round.added) in_set[j] = true;

    const bool grew = !round.added.empty();
    result.rounds.push_back(std::move(round));
    selected.clear();
    for (std::size_t j = 0; j < p; ++j)
      if (in_set[j]) selected.push_back(j);
    if (!grew) {
      result.converged = true;
      break;
    }
  }
  result.selected = selected;
  return result;
}

}  // namespace suffmdp
