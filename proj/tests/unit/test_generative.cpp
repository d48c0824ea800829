#include <doctest.h>

#include <cmath>

#include "suffmdp/generative.hpp"

using namespace suffmdp;

TEST_SUITE("generative") {
  TEST_CASE("state dimension bookkeeping") {
    for (std::size_t m : {0, 1, 2, 3, 50, 200, 7}) {
      GenerativeModelSpec spec;
      spec.n_noise = m;
      CHECK(spec.state_dim() == 64 + m / 3 + 2 * ((m + 2) / 3));
    }
    GenerativeModelSpec spec;
    spec.n_noise = 50;
    CHECK(spec.state_dim() == 114);
    spec.n_noise = 200;
    CHECK(spec.state_dim() == 264);
    CHECK(sample_trajectories(spec, 2, 3, 1).state_dim() == 264);
  }

  TEST_CASE("constants stay fixed, white noise does not") {
    GenerativeModelSpec spec;
    spec.n_noise = 9;  // 3 dependent, 3 white, 3 constant
    const TrajectoryDataset ds = sample_trajectories(spec, 3, 10, 2);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t t = 2; t <= 11; ++t) {
        CHECK(ds.state(i, t).tail(3) == ds.state(i, 1).tail(3));
        CHECK(ds.state(i, t)(64 + 3) != ds.state(i, t - 1)(64 + 3));
      }
  }

  TEST_CASE("transition law: conditional means and variances") {
    GenerativeModelSpec spec;
    Rng rng = make_rng(3);
    Vector s = Vector::Zero(64);
    s(0) = 1.0;
    s(1) = 0.5;
    const int n = 20000;
    double m0 = 0, v0 = 0, m2 = 0, v2 = 0, mu = 0, vu = 0;
    for (int k = 0; k < n; ++k) {
      const StepOutcome out = simulate_step(spec, s, 1, rng);  // A = 0
      m0 += out.next_state(0);
      v0 += out.next_state(0) * out.next_state(0);
      m2 += out.next_state(2);
      v2 += out.next_state(2) * out.next_state(2);
      mu += out.utility;
      vu += out.utility * out.utility;
    }
    m0 /= n, v0 = v0 / n - m0 * m0, m2 /= n, v2 = v2 / n - m2 * m2, mu /= n, vu = vu / n - mu * mu;
    CHECK(m0 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(v0 == doctest::Approx(0.01).epsilon(0.05));
    CHECK(std::abs(m2) < 0.02);
    CHECK(v2 == doctest::Approx(0.25).epsilon(0.05));
    CHECK(mu == doctest::Approx(2.0 * 1.5).epsilon(0.01));
    CHECK(vu == doctest::Approx(0.01).epsilon(0.05));
    // Columns 5..8 follow s_2 under A = 1 in the second pair.
    double m7 = 0;
    for (int k = 0; k < 2000; ++k) m7 += simulate_step(spec, s, 2, rng).next_state(6);
    CHECK(m7 / 2000 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(mean_utility(spec, s, 2) == doctest::Approx(-1.5));
  }

  TEST_CASE("initial state variance and truncation") {
    GenerativeModelSpec spec;
    Rng rng = make_rng(4);
    double v = 0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) v += initial_state(spec, rng).squaredNorm();
    CHECK(v / (n * 64.0) == doctest::Approx(0.25).epsilon(0.03));
    for (double u : {-5.0, -1.0, 0.0, 1.0, 1.7, 10.0}) {
      CHECK(apply_transition(TransitionFunction::quad, u) <= 3.0);
      CHECK(apply_transition(TransitionFunction::exp, u) <= 3.0);
    }
  }

  TEST_CASE("oracle feature maps") {
    GenerativeModelSpec spec;
    Vector s = Vector::LinSpaced(64, 1, 64);
    CHECK(oracle_feature_map(spec, OracleVariant::first4).apply(s) == s.head(4));
    CHECK(oracle_feature_map(spec, OracleVariant::first16).apply(s) == s.head(16));
    const Vector n3 = oracle_feature_map(spec, OracleVariant::nonlinear3).apply(s);
    CHECK(n3(0) == 1.0);
    CHECK(n3(1) == 2.0);
    CHECK(n3(2) == 7.0);
    spec.g = TransitionFunction::quad;
    s(2) = s(3) = 2.0;
    CHECK(oracle_feature_map(spec, OracleVariant::nonlinear3).apply(s)(2) == 6.0);
  }

  TEST_CASE("sampling is deterministic per seed") {
    GenerativeModelSpec spec;
    spec.n_noise = 3;
    CHECK(sample_trajectories(spec, 4, 5, 9) == sample_trajectories(spec, 4, 5, 9));
    CHECK(!(sample_trajectories(spec, 4, 5, 9) == sample_trajectories(spec, 4, 5, 10)));
  }
}
