#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "suffmdp/error.hpp"
#include "suffmdp/experiment.hpp"
#include "suffmdp/serialize.hpp"

using namespace suffmdp;

namespace {

template <class T>
Json roundtrip(const T& v) {
  const Json j = v;
  const T back = Json::parse(j.dump()).get<T>();
  return Json(back);
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("matrices keep exact doubles and NaN") {
    Matrix m(2, 3);
    m << 0.1, -1e-300, 1.0 / 3.0, std::nan(""), 7, 2e10;
    const Matrix back = matrix_from_json(Json::parse(matrix_to_json(m).dump()));
    CHECK(back(0, 0) == 0.1);
    CHECK(back(0, 2) == 1.0 / 3.0);
    CHECK(std::isnan(back(1, 0)));
    CHECK(back(1, 2) == 2e10);
    CHECK(matrix_from_json(matrix_to_json(Matrix(0, 0))).size() == 0);
  }

  TEST_CASE("feature maps of every component type") {
    Rng rng = make_rng(1);
    NetworkComponent net{{1, 3}, {glorot_layer(2, 3, rng), glorot_layer(3, 2, rng)}, Activation::arctan};
    Matrix proj = Matrix::Random(2, 5);
    const FeatureMap map(5, {SelectionComponent{{4, 0}}, net, LinearComponent{Vector::Random(5), proj},
                             NonlinearOracleComponent{TransitionFunction::exp}});
    const Json j = map;
    CHECK(roundtrip(map) == j);
    const FeatureMap back = j.get<FeatureMap>();
    const Vector s = Vector::Random(5);
    CHECK(back.apply(s) == map.apply(s));
  }

  TEST_CASE("models and configurations") {
    const AdnnModel model = initialize_adnn(Architecture::from_tuning(6, 7, 2, 3, 4, 2), 3);
    CHECK(roundtrip(model) == Json(model));
    ConstructConfig cc;
    cc.selection.dims = {1, 2, 4};
    cc.selection.grid = {{4, 1, 0.1}, {8, 2, 0.001}};
    cc.screen.max_rounds = 3;
    CHECK(roundtrip(cc) == Json(cc));
    QConfig qc;
    qc.activation = Activation::arctan;
    CHECK(roundtrip(qc) == Json(qc));
    GenerativeModelSpec g;
    g.g = TransitionFunction::quad;
    g.n_noise = 7;
    CHECK(roundtrip(g) == Json(g));
    ExperimentConfig e;
    CHECK(roundtrip(e) == Json(e));
  }

  TEST_CASE("unknown keys and bad shapes are rejected") {
    CHECK_THROWS_AS(Json::parse(R"({"lambda": 1, "bogus": 2})").get<FitConfig>(), ValidationError);
    CHECK_THROWS_AS(Json::parse(R"({"level": 0.1, "perms": 9})").get<ScreenConfig>(), ValidationError);
    CHECK_THROWS(Json::parse(R"([[1, 2], [3]])").get<DenseLayer>());
    CHECK_THROWS(matrix_from_json(Json::parse(R"([[1, 2], [3]])")));
  }

  TEST_CASE("file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "suffmdp_serialize_test";
    std::filesystem::create_directories(dir);
    write_json_file(dir / "a.json", Json{{"x", 1}});
    CHECK(read_json_file(dir / "a.json")["x"] == 1);
    write_text_file(dir / "b.json", "{not json");
    CHECK_THROWS_AS(read_json_file(dir / "b.json"), ValidationError);
    CHECK_THROWS(read_json_file(dir / "missing.json"));
    std::filesystem::remove_all(dir);
  }
}
