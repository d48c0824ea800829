#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "suffmdp/dcov.hpp"
#include "suffmdp/error.hpp"

using namespace suffmdp;

namespace {

// Definitional double sum: a_jk - abar_j. - abar_.k + abar_.. computed
// elementwise with explicit loops.
double brute_dcov(const Matrix& x, const Matrix& y) {
  const int m = static_cast<int>(x.rows());
  auto dist = [](const Matrix& z, int j, int k) {
    double s = 0;
    for (int c = 0; c < z.cols(); ++c) s += (z(j, c) - z(k, c)) * (z(j, c) - z(k, c));
    return std::sqrt(s);
  };
  auto centered = [&](const Matrix& z, int j, int k) {
    double rj = 0, ck = 0, all = 0;
    for (int l = 0; l < m; ++l) {
      rj += dist(z, j, l);
      ck += dist(z, l, k);
      for (int q = 0; q < m; ++q) all += dist(z, l, q);
    }
    return dist(z, j, k) - rj / m - ck / m + all / (m * m);
  };
  double s = 0;
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) s += centered(x, j, k) * centered(y, j, k);
  return s / (m * m);
}

}  // namespace

TEST_SUITE("dcov") {
  TEST_CASE("matches the definitional oracle") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> msize(2, 20), dsize(1, 4);
    for (int rep = 0; rep < 100; ++rep) {
      const int m = msize(rng);
      const Matrix x = testing::random_matrix(rng, m, dsize(rng));
      const Matrix y = testing::random_matrix(rng, m, dsize(rng));
      CHECK(std::abs(dcov_statistic(x, y) - brute_dcov(x, y)) <= 1e-12);
    }
  }

  TEST_CASE("m = 4 line against itself") {
    Matrix x(4, 1);
    x << 0, 1, 2, 3;
    CHECK(dcov_statistic(x, x) == doctest::Approx(brute_dcov(x, x)).epsilon(1e-14));
  }

  TEST_CASE("constant argument gives zero, scaling and translation") {
    std::mt19937_64 rng(3);
    const Matrix x = testing::random_matrix(rng, 12, 2);
    const Matrix y = testing::random_matrix(rng, 12, 3);
    CHECK(dcov_statistic(x, Matrix::Constant(12, 2, 4.0)) == 0.0);
    CHECK(dcov_statistic(x, 2.5 * x) == doctest::Approx(2.5 * dcov_statistic(x, x)).epsilon(1e-12));
    const Matrix xs = x.array() + 7.0, ys = y.array() - 3.0;
    CHECK(std::abs(dcov_statistic(xs, ys) - dcov_statistic(x, y)) <= 1e-12);
    CHECK(dcov_statistic(x, y) >= 0.0);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(dcov_statistic(Matrix::Zero(1, 1), Matrix::Zero(1, 1)), ValidationError);
    Matrix bad = Matrix::Zero(3, 1);
    bad(1, 0) = NAN;
    CHECK_THROWS_AS(dcov_statistic(bad, Matrix::Zero(3, 1)), ValidationError);
  }

  TEST_CASE("perfect dependence reaches the smallest p-value") {
    Matrix x(50, 1);
    for (int k = 0; k < 50; ++k) x(k, 0) = k;
    const auto r = dcov_permutation_pvalue(x, x, 199, 5);
    CHECK(r.p_value == doctest::Approx(1.0 / 200.0));
  }

  TEST_CASE("one permutation yields 0.5 or 1") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix x = testing::random_matrix(rng, 6, 1), y = testing::random_matrix(rng, 6, 1);
      const double p = dcov_permutation_pvalue(x, y, 1, rep).p_value;
      CHECK((p == 0.5 || p == 1.0));
    }
  }

  TEST_CASE("p-value is deterministic and scale invariant") {
    std::mt19937_64 rng(9);
    const Matrix x = testing::random_matrix(rng, 15, 2), y = testing::random_matrix(rng, 15, 1);
    const double p = dcov_permutation_pvalue(x, y, 99, 42).p_value;
    CHECK(dcov_permutation_pvalue(x, y, 99, 42).p_value == p);
    CHECK(dcov_permutation_pvalue(3.0 * x, y, 99, 42).p_value == p);
  }

  TEST_CASE("likelihood ratio test") {
    Matrix even(2, 2);
    even << 10, 10, 10, 10;
    auto r = lrt_contingency_pvalue(even);
    CHECK(*r.statistic == doctest::Approx(0.0));
    CHECK(r.p_value == 1.0);

    Matrix diag(2, 2);
    diag << 20, 0, 0, 20;
    r = lrt_contingency_pvalue(diag);
    CHECK(*r.statistic == doctest::Approx(80.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(*r.degrees_of_freedom == 1.0);
    CHECK(r.p_value < 1e-6);

    Matrix x = Matrix::Zero(10, 1), y(10, 1);
    for (int k = 0; k < 10; ++k) y(k, 0) = k % 3;
    r = lrt_independence_pvalue(x, y);
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);

    Matrix xx(40, 1), yy(40, 1);
    for (int k = 0; k < 40; ++k) xx(k, 0) = yy(k, 0) = k < 20 ? 0 : 1;
    CHECK(*lrt_independence_pvalue(xx, yy).statistic == doctest::Approx(80.0 * std::log(2.0)));
  }

  TEST_CASE("pooled p-values") {
    const double a[] = {0.02, 0.5, 0.3, 0.7, 0.9};
    CHECK(pooled_pvalue(a, 1) == doctest::Approx(0.10));
    std::vector<double> b(90, 0.5);
    for (int k = 0; k < 4; ++k) b[static_cast<std::size_t>(k)] = 0.001;
    b[40] = 0.004;
    CHECK(default_pool_order(90) == 5);
    CHECK(pooled_pvalue(b, 5) == doctest::Approx(0.072));
    const double ones[] = {1, 1, 1};
    CHECK(pooled_pvalue(ones, 2) == 1.0);
    CHECK_THROWS_AS(pooled_pvalue(std::span<const double>{}, 1), ValidationError);
    CHECK_THROWS_AS(pooled_pvalue(a, 6), ValidationError);
    // order invariance and monotonicity
    const double shuffled[] = {0.9, 0.3, 0.02, 0.7, 0.5};
    CHECK(pooled_pvalue(shuffled, 2) == pooled_pvalue(a, 2));
    const double larger[] = {0.02, 0.5, 0.35, 0.7, 0.9};
    CHECK(pooled_pvalue(larger, 2) >= pooled_pvalue(a, 2));
  }

  TEST_CASE("stratified test") {
    SUBCASE("single stratum reduces to its permutation test") {
      std::mt19937_64 rng(4);
      StratifiedSample s;
      s.g = testing::random_matrix(rng, 12, 1);
      s.h = testing::random_matrix(rng, 12, 2);
      s.times.assign(12, 1);
      s.actions.assign(12, 1);
      const auto r = stratified_pooled_test(s, StratifiedTestConfig{0.1, 99, 5, {}}, 3);
      REQUIRE(r.strata.size() == 1);
      CHECK(r.p_value == r.strata[0].p_value);
      CHECK(r.pooled_u == 1);
    }
    SUBCASE("too small strata are rejected") {
      StratifiedSample s;
      s.g = Matrix::Zero(4, 1);
      s.h = Matrix::Zero(4, 1);
      s.times = {1, 1, 2, 2};
      s.actions = {1, 2, 1, 2};
      CHECK_THROWS_WITH_AS(stratified_pooled_test(s, {}, 1), doctest::Contains("insufficient per-stratum data"),
                           ValidationError);
    }
    SUBCASE("Bonferroni over actions within a time point") {
      std::mt19937_64 rng(5);
      StratifiedSample s;
      s.g = testing::random_matrix(rng, 20, 1);
      s.h = testing::random_matrix(rng, 20, 1);
      s.times.assign(20, 1);
      s.actions.resize(20);
      for (int k = 0; k < 20; ++k) s.actions[static_cast<std::size_t>(k)] = k < 10 ? 1 : 2;
      s.actions[0] = 3;  // stratum of size 1 is skipped
      const auto r = stratified_pooled_test(s, StratifiedTestConfig{0.1, 49, 5, {}}, 9);
      REQUIRE(r.strata.size() == 2);
      const double expect = std::min(1.0, 2.0 * std::min(r.strata[0].p_value, r.strata[1].p_value));
      CHECK(r.time_p_values[0] == doctest::Approx(expect));
    }
  }
}
