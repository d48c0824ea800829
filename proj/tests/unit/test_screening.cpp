#include <doctest.h>

#include "helpers.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/screening.hpp"

using namespace suffmdp;

TEST_SUITE("screening") {
  TEST_CASE("utility driven by one coordinate selects that coordinate") {
    const TrajectoryDataset ds = testing::toy_dataset(30, 20, 4, 2, 8, 2.0);
    ScreenConfig cfg;
    cfg.permutations = 499;
    const ScreenResult r = screen(ds, cfg, 1);
    CHECK(r.selected == std::vector<std::size_t>{0});
    CHECK(r.converged);
    CHECK(r.rounds.back().added.empty());
    CHECK(r.rounds.front().tested.size() == 4);
  }

  TEST_CASE("independent utility selects nothing, rounds are monotone") {
    const TrajectoryDataset ds = testing::toy_dataset(20, 20, 3, 2, 9, 0.0);
    ScreenConfig cfg;
    cfg.permutations = 199;
    const ScreenResult r = screen(ds, cfg, 2);
    CHECK(r.selected.empty());
    CHECK(r.rounds.size() == 1);
  }

  TEST_CASE("linear simulation model selects the utility drivers") {
    GenerativeModelSpec spec;
    const TrajectoryDataset ds = sample_trajectories(spec, 30, 90, 4);
    ScreenConfig cfg;
    const ScreenResult r = screen(ds, cfg, 4);
    CHECK(r.selected == std::vector<std::size_t>{0, 1, 2, 3});
  }

  TEST_CASE("deterministic and independent of column order") {
    const TrajectoryDataset ds = testing::toy_dataset(30, 20, 4, 2, 10, 2.0);
    ScreenConfig cfg;
    cfg.permutations = 99;
    CHECK(screen(ds, cfg, 5).rounds[0].pooled_p == screen(ds, cfg, 5).rounds[0].pooled_p);
    cfg.max_rounds = 1;
    const ScreenResult one = screen(ds, cfg, 5);
    CHECK(one.rounds.size() == 1);
  }
}
