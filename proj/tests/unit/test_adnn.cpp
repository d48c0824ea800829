#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "suffmdp/adnn.hpp"
#include "suffmdp/error.hpp"

using namespace suffmdp;

namespace {

TransitionTable toy_table(std::size_t n, std::size_t T, std::size_t p, std::size_t K,
                          std::uint64_t seed, double coef) {
  return make_transition_table(testing::toy_dataset(n, T, p, K, seed, coef));
}

double batch_objective(const AdnnModel& m, const TransitionTable& t, std::span<const std::size_t> rows,
                       double lambda, int action) {
  double s = 0;
  for (std::size_t r : rows) {
    const Vector pred = adnn_forward(m, t.states.row(static_cast<Eigen::Index>(r)).transpose(), action);
    s += (pred - t.responses.row(static_cast<Eigen::Index>(r)).transpose()).squaredNorm();
  }
  return s / static_cast<double>(rows.size()) + lambda * group_lasso_penalty(m.feature_layers[0].weight);
}

// Central differences over every parameter of the feature network and of
// head `action`; returns the worst relative error.
double gradient_check(AdnnModel m, const TransitionTable& t, std::span<const std::size_t> rows,
                      double lambda, int action) {
  const AdnnGradient g = adnn_subgradient(t, rows, m, lambda, action);
  const double h = 1e-5;
  double worst = 0;
  auto visit = [&](std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grads) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = batch_objective(m, t, rows, lambda, action);
        param = keep - h;
        const double down = batch_objective(m, t, rows, lambda, action);
        param = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
      };
      for (Eigen::Index i = 0; i < layers[k].weight.size(); ++i)
        probe(layers[k].weight.data()[i], grads[k].weight.data()[i]);
      for (Eigen::Index i = 0; i < layers[k].bias.size(); ++i)
        probe(layers[k].bias.data()[i], grads[k].bias.data()[i]);
    }
  };
  visit(m.feature_layers, g.feature);
  visit(m.heads[static_cast<std::size_t>(action - 1)], g.head);
  return worst;
}

}  // namespace

TEST_SUITE("adnn") {
  TEST_CASE("zero parameters give sigmoid(0) features") {
    Architecture arch = Architecture::from_tuning(3, 4, 2, 2, 3, 2);
    AdnnModel m = initialize_adnn(arch, 1);
    for (auto& l : m.feature_layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
    const Vector f = feature_forward(m, Vector::Constant(3, 2.0));
    CHECK(f.size() == 2);
    for (Eigen::Index k = 0; k < f.size(); ++k) CHECK(f(k) == 0.5);
    CHECK_THROWS_AS(feature_forward(m, Vector::Zero(2)), ValidationError);
  }

  TEST_CASE("zero input column makes features invariant to that coordinate") {
    AdnnModel m = initialize_adnn(Architecture::from_tuning(4, 5, 2, 3, 4, 2), 7);
    m.feature_layers[0].weight.col(2).setZero();
    Vector s = Vector::LinSpaced(4, -1, 1);
    const Vector f0 = feature_forward(m, s);
    s(2) += 17.0;
    CHECK(feature_forward(m, s) == f0);
    CHECK(m.feature_map().inputs_used() == std::vector<std::size_t>{0, 1, 3});
  }

  TEST_CASE("single layer selecting s1 outputs sigmoid(s1)") {
    AdnnModel m = initialize_adnn(Architecture::from_tuning(3, 4, 1, 1, 1, 1), 2);
    m.feature_layers[0].weight << 1, 0, 0;
    m.feature_layers[0].bias << 0;
    Vector s(3);
    s << 0.3, -2, 5;
    CHECK(feature_forward(m, s)(0) == doctest::Approx(1 / (1 + std::exp(-0.3))));
  }

  TEST_CASE("heads: affine output, per action, shape p + 1") {
    AdnnModel m = initialize_adnn(Architecture::from_tuning(3, 4, 2, 2, 2, 1), 3);
    m.heads[0][0].weight.setZero();
    m.heads[0][0].bias << 1, 2, 3, 4;
    const Vector s = Vector::Ones(3);
    CHECK(adnn_forward(m, s, 1) == m.heads[0][0].bias);
    CHECK(adnn_forward(m, s, 2).size() == 4);
    CHECK(adnn_forward(m, s, 2) != adnn_forward(m, s, 1));
    m.heads[1] = m.heads[0];
    CHECK(adnn_forward(m, s, 2) == adnn_forward(m, s, 1));
    CHECK_THROWS_AS(adnn_forward(m, s, 3), ValidationError);
  }

  TEST_CASE("group lasso penalty and cost") {
    Matrix w(2, 2);
    w << 3, 4, 0, 0;
    CHECK(group_lasso_penalty(w) == doctest::Approx(7.0));

    const TransitionTable t = toy_table(4, 3, 2, 2, 1, 0.0);
    AdnnModel m = initialize_adnn(Architecture::from_tuning(2, 3, 2, 1, 2, 1), 1);
    const double c0 = adnn_cost(t, m, 0.0), c1 = adnn_cost(t, m, 0.5), c2 = adnn_cost(t, m, 1.0);
    CHECK(c0 <= c1);
    CHECK(c1 <= c2);
    CHECK(c1 - c0 == doctest::Approx(0.5 * group_lasso_penalty(m.feature_layers[0].weight)));

    // A model that reproduces constant responses exactly has zero cost.
    TransitionTable flat = t;
    flat.responses.setConstant(0.25);
    for (auto& head : m.heads) {
      head[0].weight.setZero();
      head[0].bias.setConstant(0.25);
    }
    CHECK(adnn_cost(flat, m, 0.0) == 0.0);
  }

  TEST_CASE("subgradient matches central differences") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t p = 2 + rep % 3, depth = 1 + rep % 2;
      const TransitionTable t = toy_table(3, 4, p, 2, 100 + rep, 1.0);
      const AdnnModel m = initialize_adnn(Architecture::from_tuning(p, p + 1, 2, 2, 3, depth), rep);
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < t.size(); ++r)
        if (t.actions[r] == 1 + rep % 2) rows.push_back(r);
      CHECK(gradient_check(m, t, rows, 0.3, 1 + rep % 2) <= 1e-4);
    }
  }

  TEST_CASE("subgradient structure") {
    const TransitionTable t = toy_table(3, 4, 2, 2, 5, 0.0);
    AdnnModel m = initialize_adnn(Architecture::from_tuning(2, 3, 2, 2, 2, 2), 3);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.size(); ++r)
      if (t.actions[r] == 2) rows.push_back(r);
    const AdnnGradient g = adnn_subgradient(t, rows, m, 0.0, 2);
    CHECK(g.head.size() == m.heads[1].size());
    CHECK(g.feature.size() == m.feature_layers.size());
    // a zero column has a zero penalty subgradient
    m.feature_layers[0].weight.col(0).setZero();
    const AdnnGradient g0 = adnn_subgradient(t, rows, m, 0.0, 2);
    const AdnnGradient g1 = adnn_subgradient(t, rows, m, 5.0, 2);
    CHECK(g1.feature[0].weight.col(0) == g0.feature[0].weight.col(0));
    CHECK(g1.feature[0].weight.col(1) != g0.feature[0].weight.col(1));
    // a mixed batch is rejected
    std::vector<std::size_t> mixed{0, 1, 2, 3, 4, 5};
    CHECK_THROWS_AS(adnn_subgradient(t, mixed, m, 0.0, 2), ValidationError);
    // zero residuals and lambda 0 give a zero gradient
    TransitionTable flat = t;
    flat.responses.setConstant(1.0);
    for (auto& head : m.heads) {
      head.back().weight.setZero();
      head.back().bias.setConstant(1.0);
    }
    const AdnnGradient gz = adnn_subgradient(flat, rows, m, 0.0, 2);
    for (const auto& l : gz.feature) CHECK(l.weight.norm() == 0.0);
    for (const auto& l : gz.head) CHECK(l.weight.norm() + l.bias.norm() == 0.0);
  }

  TEST_CASE("fit: zero iterations, determinism and errors") {
    const TransitionTable t = toy_table(10, 10, 3, 2, 9, 1.0);
    const Architecture arch = Architecture::from_tuning(3, 4, 2, 2, 2, 1);
    FitConfig cfg;
    cfg.max_iterations = 0;
    cfg.seed = 5;
    const AdnnModel init = fit_adnn(t, arch, cfg);
    const AdnnModel fresh = initialize_adnn(arch, 5);
    CHECK(init.feature_layers[0].weight == fresh.feature_layers[0].weight);
    CHECK(init.heads[1][0].weight == fresh.heads[1][0].weight);

    cfg.max_iterations = 50;
    const AdnnModel a = fit_adnn(t, arch, cfg), b = fit_adnn(t, arch, cfg);
    CHECK(a.feature_layers[0].weight == b.feature_layers[0].weight);
    CHECK(a.heads[0][0].bias == b.heads[0][0].bias);

    cfg.batch_fraction = 0.001;
    CHECK_THROWS_WITH_AS(fit_adnn(t, arch, cfg), doctest::Contains("batch fraction too small"), ValidationError);
    cfg.batch_fraction = 0.1;
    CHECK_THROWS_AS(fit_adnn(filter_action(t, 1), arch, cfg), ValidationError);  // action count mismatch
    TransitionTable one = t;
    std::fill(one.actions.begin(), one.actions.end(), 1);
    CHECK_THROWS_AS(fit_adnn(one, arch, cfg), ValidationError);  // action 2 absent
  }

  TEST_CASE("fit recovers a linear slope") {
    const TransitionTable t = filter_action(toy_table(40, 20, 1, 1, 17, 2.0), 1);
    FitConfig cfg;
    cfg.lambda = 0.0;
    cfg.step0 = 0.5;
    cfg.step_decay = 2000;
    cfg.max_iterations = 20000;
    cfg.tolerance = 1e-12;
    cfg.cost_check_interval = 100;
    cfg.seed = 1;
    const AdnnModel m = fit_adnn(t, Architecture::from_tuning(1, 2, 1, 1, 1, 1), cfg);
    // Least-squares slope of the same data as the oracle.
    const Vector s = t.states.col(0), u = t.responses.col(0);
    const double sc = s.mean(), uc = u.mean();
    const double ols = (s.array() - sc).matrix().dot((u.array() - uc).matrix()) /
                       (s.array() - sc).matrix().squaredNorm();
    const double fitted = (adnn_forward(m, Vector::Constant(1, 0.5), 1)(0) -
                           adnn_forward(m, Vector::Constant(1, -0.5), 1)(0));
    CHECK(std::abs(ols - 2.0) < 0.05);
    CHECK(std::abs(fitted - 2.0) <= 0.2);
  }

  TEST_CASE("cross-validation") {
    const TransitionTable t = toy_table(12, 10, 2, 2, 31, 1.5);
    FitConfig cfg;
    cfg.max_iterations = 300;
    cfg.cost_check_interval = 50;
    const std::vector<TuningCell> one{{3, 1, 0.1}};
    const CvResult r1 = cross_validate_adnn(t, 1, one, 3, cfg, 1);
    CHECK(r1.best == one[0]);

    const std::vector<TuningCell> dup{{2, 1, 0.01}, {2, 1, 0.01}};
    const CvResult rd = cross_validate_adnn(t, 1, dup, 3, cfg, 1);
    CHECK(rd.scores[0] == rd.scores[1]);
    CHECK(rd.best == dup[0]);

    const std::vector<TuningCell> lam{{2, 1, 0.001}, {2, 1, 1e6}};
    const CvResult rl = cross_validate_adnn(t, 1, lam, 3, cfg, 1);
    CHECK(rl.scores[0] <= rl.scores[1]);
    CHECK(rl.best.lambda == 0.001);

    CHECK_THROWS_AS(cross_validate_adnn(t, 1, lam, 13, cfg, 1), ValidationError);
    CHECK_THROWS_AS(cross_validate_adnn(t, 1, lam, 1, cfg, 1), ValidationError);
    CHECK_THROWS_AS(cross_validate_adnn(t, 1, std::span<const TuningCell>{}, 3, cfg, 1), ValidationError);
    CHECK(cross_validate_adnn(t, 1, lam, 3, cfg, 1).scores == rl.scores);
  }

  TEST_CASE("tuning grid") {
    CHECK(default_tuning_grid().size() == 24);
    const std::size_t w[] = {2, 4};
    const std::size_t d[] = {1};
    const double l[] = {0.1, 1.0};
    const auto g = tuning_grid(w, d, l);
    REQUIRE(g.size() == 4);
    CHECK(g[1] == TuningCell{2, 1, 1.0});
  }

  TEST_CASE("residual test: independent noise residuals rarely reject") {
    const TransitionTable t = toy_table(20, 8, 2, 2, 41, 0.0);
    std::mt19937_64 rng(3);
    StratifiedTestConfig tc{0.1, 99, 5, {}};
    int rejections = 0;
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix noise = testing::random_matrix(rng, static_cast<Eigen::Index>(t.size()), 3);
      rejections += residual_independence_pvalue(t, t.responses - noise, tc, rep).reject;
    }
    CHECK(rejections <= 6);
  }

  TEST_CASE("dimension selection and active inputs") {
    const TransitionTable t = toy_table(15, 10, 2, 2, 51, 1.0);
    SelectionConfig sc;
    sc.dims = {2};
    sc.grid = {{2, 1, 0.01}};
    sc.fit.max_iterations = 200;
    sc.test.permutations = 99;
    const DimensionSelection sel = select_feature_dimension(t, sc, 1);
    CHECK(sel.feature_dim == 2);
    CHECK(sel.reports.size() == 1);
    sc.dims = {2, 1};
    CHECK_THROWS_AS(select_feature_dimension(t, sc, 1), ValidationError);

    AdnnModel m = initialize_adnn(Architecture::from_tuning(3, 4, 1, 1, 1, 1), 1);
    m.feature_layers[0].weight.setZero();
    CHECK(active_inputs(m).empty());
    m.feature_layers[0].weight << 1.0, 1e-5, -0.5;
    CHECK(active_inputs(m, 1e-3) == std::vector<std::size_t>{0, 2});
  }

  TEST_CASE("construction isolates the single relevant variable") {
    const TrajectoryDataset ds = testing::toy_dataset(30, 20, 3, 2, 61, 2.0);
    ConstructConfig cfg;
    cfg.screen.permutations = 499;
    cfg.selection.grid = {{2, 1, 0.01}};
    cfg.selection.fit.max_iterations = 500;
    cfg.selection.fit.cost_check_interval = 50;
    cfg.selection.test.permutations = 199;
    const SufficientFeatures sf = construct_sufficient_features(ds, cfg, 3);
    CHECK(sf.screening.selected == std::vector<std::size_t>{0});
    CHECK(sf.variables == std::vector<std::size_t>{0});
    CHECK(sf.feature_dim == 1);
    CHECK(sf.map.input_dim() == 3);
    CHECK(sf.map.output_dim() == 1);
  }

  TEST_CASE("construction with nothing screened returns an empty map") {
    const TrajectoryDataset ds = testing::toy_dataset(20, 20, 2, 2, 71, 0.0);
    ConstructConfig cfg;
    cfg.screen.permutations = 199;
    cfg.screen.level = 0.01;
    const SufficientFeatures sf = construct_sufficient_features(ds, cfg, 3);
    CHECK(sf.empty);
    CHECK(sf.map.output_dim() == 0);
    CHECK(sf.variables.empty());
  }
}
