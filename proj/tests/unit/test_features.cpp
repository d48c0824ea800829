#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "suffmdp/baselines.hpp"
#include "suffmdp/error.hpp"
#include "suffmdp/feature_map.hpp"
#include "suffmdp/network.hpp"

using namespace suffmdp;

TEST_SUITE("features") {
  TEST_CASE("activations") {
    CHECK(activate(Activation::sigmoid, 0.0) == 0.5);
    CHECK(activate(Activation::arctan, 0.0) == 0.5);
    for (double z : {-30.0, -1.0, 0.3, 4.0, 30.0})
      for (Activation f : {Activation::sigmoid, Activation::arctan}) {
        const double v = activate(f, z);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        const double h = 1e-6;
        const double fd = (activate(f, z + h) - activate(f, z - h)) / (2 * h);
        CHECK(activate_derivative(f, z, v) == doctest::Approx(fd).epsilon(1e-6));
      }
    CHECK(parse_activation("arctan") == Activation::arctan);
    CHECK_THROWS_AS(parse_activation("relu"), ValidationError);
  }

  TEST_CASE("glorot initialisation bounds") {
    Rng rng = make_rng(1);
    const DenseLayer l = glorot_layer(5, 3, rng);
    CHECK(l.weight.rows() == 3);
    CHECK(l.weight.cols() == 5);
    CHECK(l.weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 8.0));
    CHECK(l.bias.isZero());
  }

  TEST_CASE("feature map components") {
    Vector s(5);
    s << 1, 2, 3, 4, 5;
    const FeatureMap sel(5, {SelectionComponent{{3, 0}}});
    CHECK(sel.apply(s) == Vector::Map(std::vector<double>{4, 1}.data(), 2));
    const FeatureMap orc(5, {NonlinearOracleComponent{TransitionFunction::identity}});
    CHECK(orc.apply(s)(2) == 7.0);
    CHECK(orc.inputs_used() == std::vector<std::size_t>{0, 1, 2, 3});

    Matrix proj(1, 5);
    proj << 0, 1, 0, 0, 0;
    const FeatureMap lin(5, {LinearComponent{Vector::Ones(5), proj}});
    CHECK(lin.apply(s)(0) == 1.0);
    CHECK(lin.inputs_used() == std::vector<std::size_t>{1});

    const FeatureMap both(5, {SelectionComponent{{4}}, LinearComponent{Vector::Ones(5), proj}});
    CHECK(both.output_dim() == 2);
    CHECK(both.apply_rows(Matrix::Ones(3, 5)).rows() == 3);
    CHECK_THROWS_AS(both.apply(Vector::Zero(4)), ValidationError);
    CHECK_THROWS_AS(FeatureMap(3, {SelectionComponent{{3}}}), ValidationError);
    CHECK(FeatureMap().output_dim() == 0);
  }

  TEST_CASE("active columns use a relative threshold") {
    Matrix w(2, 3);
    w << 1, 0, 1e-4, 0, 0, 0;
    CHECK(active_columns(w, 1e-3) == std::vector<std::size_t>{0});
    CHECK(active_columns(w, 0.0) == std::vector<std::size_t>{0, 2});
    CHECK(active_columns(Matrix::Zero(2, 3), 0.0).empty());
  }

  TEST_CASE("PCA: rank one data keeps one component") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0, 1);
    Vector v(3);
    v << 1, 2, -2;
    std::vector<Matrix> states;
    for (int i = 0; i < 10; ++i) {
      Matrix s(6, 3);
      for (int t = 0; t < 6; ++t) s.row(t) = z(rng) * v.transpose();
      states.push_back(s);
    }
    std::vector<std::string> ids(10, "x");
    for (int i = 0; i < 10; ++i) ids[static_cast<std::size_t>(i)] = std::to_string(i);
    const TrajectoryDataset ds(ids, states, std::vector<std::vector<int>>(10, std::vector<int>(5, 1)),
                               std::vector<std::vector<double>>(10, std::vector<double>(5, 0.0)), 1);
    const PcaResult r = pca_feature_map(ds, 0.9);
    CHECK(r.n_components == 1);
    CHECK(std::abs(r.components.row(0).dot(v.normalized())) == doctest::Approx(1.0));
  }

  TEST_CASE("PCA: isotropic data needs all components, rows orthonormal") {
    const TrajectoryDataset ds = testing::toy_dataset(200, 20, 4, 1, 3);
    const PcaResult r = pca_feature_map(ds, 0.9);
    CHECK(r.n_components == 4);
    const Matrix g = r.components * r.components.transpose();
    CHECK((g - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);

    // Time-averaged covariance oracle computed directly.
    Matrix cov = Matrix::Zero(4, 4);
    for (std::size_t t = 1; t <= 20; ++t) {
      Matrix x(200, 4);
      for (std::size_t i = 0; i < 200; ++i) x.row(static_cast<Eigen::Index>(i)) = ds.state(i, t).transpose();
      const Matrix c = x.rowwise() - x.colwise().mean();
      cov += c.transpose() * c / 200.0;
    }
    cov /= 20.0;
    CHECK(r.eigenvalues.sum() == doctest::Approx(cov.trace()).epsilon(1e-10));

    // Reconstruction error is nonincreasing in k.
    double last = INFINITY;
    for (int k = 1; k <= 4; ++k) {
      const Matrix v = r.components.topRows(k);
      const Matrix x = ds.states(0).rowwise() - r.mean.transpose();
      const double err = (x - x * v.transpose() * v).squaredNorm();
      CHECK(err <= last + 1e-12);
      last = err;
    }
  }

  TEST_CASE("PCA: zero covariance is an error") {
    std::vector<Matrix> states(3, Matrix::Ones(4, 2));
    const TrajectoryDataset ds({"a", "b", "c"}, states, std::vector<std::vector<int>>(3, {1, 1, 1}),
                               std::vector<std::vector<double>>(3, {0, 0, 0}), 1);
    CHECK_THROWS_AS(pca_feature_map(ds), ValidationError);
  }

  TEST_CASE("tNN with one action equals dimension selection on the whole data") {
    const TrajectoryDataset ds = testing::toy_dataset(12, 8, 2, 1, 5, 1.0);
    SelectionConfig sc;
    sc.dims = {1, 2};
    sc.grid = {{2, 1, 0.01}};
    sc.fit.max_iterations = 100;
    sc.test.permutations = 49;
    const TnnResult tnn = fit_tnn(ds, sc, 9);
    const DimensionSelection sel =
        select_feature_dimension(make_transition_table(ds), sc, derive_seed(9, {stream::kTnn, 1}));
    CHECK(tnn.feature_dim == sel.feature_dim);
    CHECK(tnn.actions[0].model.feature_layers[0].weight == sel.model.feature_layers[0].weight);
    CHECK(tnn.map.output_dim() == sel.feature_dim);
  }

  TEST_CASE("tNN bookkeeping over two actions") {
    const TrajectoryDataset ds = testing::toy_dataset(12, 8, 3, 2, 6, 1.0);
    SelectionConfig sc;
    sc.dims = {1, 3};
    sc.grid = {{2, 1, 0.01}};
    sc.fit.max_iterations = 100;
    sc.test.permutations = 49;
    const TnnResult tnn = fit_tnn(ds, sc, 2);
    REQUIRE(tnn.actions.size() == 2);
    CHECK(tnn.feature_dim == tnn.actions[0].feature_dim + tnn.actions[1].feature_dim);
    CHECK(tnn.map.output_dim() == tnn.feature_dim);
    std::set<std::size_t> u(tnn.actions[0].variables.begin(), tnn.actions[0].variables.end());
    u.insert(tnn.actions[1].variables.begin(), tnn.actions[1].variables.end());
    CHECK(std::vector<std::size_t>(u.begin(), u.end()) == tnn.variables);
  }
}
