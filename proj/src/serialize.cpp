#include "suffmdp/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "suffmdp/error.hpp"

namespace suffmdp {

namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

// Rejects keys outside `allowed` so that typos in config files surface.
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key()))
      throw ValidationError(std::string(what) + ": unknown key '" + it.key() + "'");
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("matrix: expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.front().size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("matrix: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number_from(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v(k)));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("vector: expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number_from(j[k]);
  return v;
}

// ---------------------------------------------------------------------------
// Tests and screening

void to_json(Json& j, const StratumResult& v) {
  j = Json{{"time", v.time}, {"action", v.action}, {"sample_size", v.sample_size},
           {"statistic", number(v.statistic)}, {"p_value", number(v.p_value)}};
}

void to_json(Json& j, const TestReport& v) {
  j = Json{{"method", v.method}};
  if (v.statistic) j["statistic"] = number(*v.statistic);
  j["p_value"] = number(v.p_value);
  j["level"] = v.level;
  j["reject"] = v.reject;
  j["degenerate"] = v.degenerate;
  if (v.degrees_of_freedom) j["degrees_of_freedom"] = *v.degrees_of_freedom;
  j["n_permutations"] = v.n_permutations;
  j["seed"] = v.seed;
  j["pooled_u"] = v.pooled_u;
  j["tested_times"] = v.tested_times;
  Json tp = Json::array();
  for (double p : v.time_p_values) tp.push_back(number(p));
  j["time_p_values"] = tp;
  j["strata"] = v.strata;
}

void to_json(Json& j, const ScreenRound& v) {
  Json p = Json::array();
  for (double x : v.pooled_p) p.push_back(number(x));
  j = Json{{"round", v.round}, {"tested", v.tested}, {"pooled_p", p}, {"added", v.added}};
}

void to_json(Json& j, const ScreenResult& v) {
  j = Json{{"selected", v.selected}, {"converged", v.converged}, {"level", v.level},
           {"permutations", v.permutations}, {"seed", v.seed}, {"rounds", v.rounds}};
}

// ---------------------------------------------------------------------------
// Networks and feature maps

void to_json(Json& j, const DenseLayer& v) {
  j = Json{{"weight", matrix_to_json(v.weight)}, {"bias", vector_to_json(v.bias)}};
}

void from_json(const Json& j, DenseLayer& v) {
  v.weight = matrix_from_json(j.at("weight"));
  v.bias = vector_from_json(j.at("bias"));
  if (v.bias.size() != v.weight.rows()) throw ValidationError("layer: bias does not match weight rows");
}

void to_json(Json& j, const FeatureMap& v) {
  Json comps = Json::array();
  for (const auto& c : v.components()) {
    Json cj;
    if (auto* s = std::get_if<SelectionComponent>(&c)) {
      cj = Json{{"type", "selection"}, {"inputs", s->inputs}};
    } else if (auto* n = std::get_if<NetworkComponent>(&c)) {
      cj = Json{{"type", "network"}, {"activation", to_string(n->activation)}, {"inputs", n->inputs},
                {"layers", n->layers}};
    } else if (auto* l = std::get_if<LinearComponent>(&c)) {
      cj = Json{{"type", "linear"}, {"center", vector_to_json(l->center)},
                {"projection", matrix_to_json(l->projection)}};
    } else if (auto* o = std::get_if<NonlinearOracleComponent>(&c)) {
      cj = Json{{"type", "oracle_nonlinear3"}, {"g", to_string(o->g)}};
    }
    comps.push_back(std::move(cj));
  }
  j = Json{{"input_dim", v.input_dim()}, {"output_dim", v.output_dim()}, {"components", comps}};
}

void from_json(const Json& j, FeatureMap& v) {
  std::vector<FeatureMap::Component> comps;
  for (const Json& cj : j.at("components")) {
    const std::string type = cj.at("type").get<std::string>();
    if (type == "selection") {
      comps.emplace_back(SelectionComponent{cj.at("inputs").get<std::vector<std::size_t>>()});
    } else if (type == "network") {
      comps.emplace_back(NetworkComponent{cj.at("inputs").get<std::vector<std::size_t>>(),
                                          cj.at("layers").get<std::vector<DenseLayer>>(),
                                          parse_activation(cj.at("activation").get<std::string>())});
    } else if (type == "linear") {
      comps.emplace_back(LinearComponent{vector_from_json(cj.at("center")),
                                         matrix_from_json(cj.at("projection"))});
    } else if (type == "oracle_nonlinear3") {
      comps.emplace_back(NonlinearOracleComponent{parse_transition_function(cj.at("g").get<std::string>())});
    } else {
      throw ValidationError("feature map: unknown component type '" + type + "'");
    }
  }
  v = FeatureMap(j.at("input_dim").get<std::size_t>(), std::move(comps));
}

void to_json(Json& j, const Architecture& v) {
  j = Json{{"input_dim", v.input_dim}, {"feature_dim", v.feature_dim}, {"output_dim", v.output_dim},
           {"n_actions", v.n_actions}, {"feature_hidden", v.feature_hidden},
           {"head_hidden", v.head_hidden}, {"activation", to_string(v.activation)}};
}

void from_json(const Json& j, Architecture& v) {
  v.input_dim = j.at("input_dim").get<std::size_t>();
  v.feature_dim = j.at("feature_dim").get<std::size_t>();
  v.output_dim = j.at("output_dim").get<std::size_t>();
  v.n_actions = j.at("n_actions").get<std::size_t>();
  v.feature_hidden = j.at("feature_hidden").get<std::vector<std::size_t>>();
  v.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
  v.activation = parse_activation(j.at("activation").get<std::string>());
  v.validate();
}

void to_json(Json& j, const AdnnModel& v) {
  Json trace = Json::array();
  for (const auto& row : v.trace) {
    Json r = Json::array();
    for (double c : row) r.push_back(number(c));
    trace.push_back(std::move(r));
  }
  j = Json{{"architecture", v.architecture}, {"feature_layers", v.feature_layers},
           {"heads", v.heads}, {"iterations", v.iterations}, {"converged", v.converged},
           {"trace", trace}};
}

void from_json(const Json& j, AdnnModel& v) {
  v.architecture = j.at("architecture").get<Architecture>();
  v.feature_layers = j.at("feature_layers").get<std::vector<DenseLayer>>();
  v.heads = j.at("heads").get<std::vector<std::vector<DenseLayer>>>();
  read(j, "iterations", v.iterations);
  read(j, "converged", v.converged);
  v.trace.clear();
  if (auto it = j.find("trace"); it != j.end())
    for (const Json& row : *it) {
      std::vector<double> r;
      for (const Json& c : row) r.push_back(number_from(c));
      v.trace.push_back(std::move(r));
    }
  if (v.heads.size() != v.architecture.n_actions)
    throw ValidationError("model: head count does not match the architecture");
}

// ---------------------------------------------------------------------------
// Configurations

void to_json(Json& j, const TuningCell& v) {
  j = Json{{"width", v.width}, {"depth", v.depth}, {"lambda", v.lambda}};
}

void from_json(const Json& j, TuningCell& v) {
  check_keys(j, {"width", "depth", "lambda"}, "grid cell");
  read(j, "width", v.width);
  read(j, "depth", v.depth);
  read(j, "lambda", v.lambda);
}

void to_json(Json& j, const FitConfig& v) {
  j = Json{{"lambda", v.lambda}, {"batch_fraction", v.batch_fraction}, {"step0", v.step0},
           {"step_decay", v.step_decay}, {"tolerance", v.tolerance},
           {"max_iterations", v.max_iterations}, {"cost_check_interval", v.cost_check_interval}};
}

void from_json(const Json& j, FitConfig& v) {
  check_keys(j, {"lambda", "batch_fraction", "step0", "step_decay", "tolerance", "max_iterations",
                 "cost_check_interval"},
             "fit");
  read(j, "lambda", v.lambda);
  read(j, "batch_fraction", v.batch_fraction);
  read(j, "step0", v.step0);
  read(j, "step_decay", v.step_decay);
  read(j, "tolerance", v.tolerance);
  read(j, "max_iterations", v.max_iterations);
  read(j, "cost_check_interval", v.cost_check_interval);
}

void to_json(Json& j, const StratifiedTestConfig& v) {
  j = Json{{"level", v.level}, {"permutations", v.permutations}, {"min_stratum", v.min_stratum}};
  if (v.pool_order) j["pool_order"] = *v.pool_order;
}

void from_json(const Json& j, StratifiedTestConfig& v) {
  check_keys(j, {"level", "permutations", "min_stratum", "pool_order"}, "test");
  read(j, "level", v.level);
  read(j, "permutations", v.permutations);
  read(j, "min_stratum", v.min_stratum);
  if (auto it = j.find("pool_order"); it != j.end() && !it->is_null())
    v.pool_order = it->get<std::size_t>();
}

void to_json(Json& j, const ScreenConfig& v) {
  j = Json{{"level", v.level}, {"permutations", v.permutations}, {"min_stratum", v.min_stratum}};
  if (v.max_rounds) j["max_rounds"] = *v.max_rounds;
}

void from_json(const Json& j, ScreenConfig& v) {
  check_keys(j, {"level", "permutations", "min_stratum", "max_rounds"}, "screen");
  read(j, "level", v.level);
  read(j, "permutations", v.permutations);
  read(j, "min_stratum", v.min_stratum);
  if (auto it = j.find("max_rounds"); it != j.end() && !it->is_null())
    v.max_rounds = it->get<std::size_t>();
}

void to_json(Json& j, const SelectionConfig& v) {
  j = Json{{"dims", v.dims}, {"grid", v.grid}, {"folds", v.folds}, {"fit", v.fit},
           {"test", v.test}, {"activation", to_string(v.activation)}};
}

void from_json(const Json& j, SelectionConfig& v) {
  check_keys(j, {"dims", "grid", "folds", "fit", "test", "activation"}, "selection");
  read(j, "dims", v.dims);
  read(j, "grid", v.grid);
  read(j, "folds", v.folds);
  if (auto it = j.find("fit"); it != j.end()) from_json(*it, v.fit);
  if (auto it = j.find("test"); it != j.end()) from_json(*it, v.test);
  if (auto it = j.find("activation"); it != j.end())
    v.activation = parse_activation(it->get<std::string>());
  if (v.grid.empty()) throw ValidationError("selection: empty grid");
}

void to_json(Json& j, const ConstructConfig& v) {
  j = Json{{"screen", v.screen}, {"selection", v.selection}, {"screen_first", v.screen_first},
           {"max_outer", v.max_outer}, {"column_tolerance", v.column_tolerance}};
}

void from_json(const Json& j, ConstructConfig& v) {
  check_keys(j, {"screen", "selection", "screen_first", "max_outer", "column_tolerance"}, "construct");
  if (auto it = j.find("screen"); it != j.end()) from_json(*it, v.screen);
  if (auto it = j.find("selection"); it != j.end()) from_json(*it, v.selection);
  read(j, "screen_first", v.screen_first);
  read(j, "max_outer", v.max_outer);
  read(j, "column_tolerance", v.column_tolerance);
}

void to_json(Json& j, const DimensionReport& v) {
  Json scores = Json::array();
  for (double s : v.cv_scores) scores.push_back(number(s));
  j = Json{{"feature_dim", v.feature_dim}, {"cell", v.cell}, {"cv_scores", scores}, {"test", v.test}};
}

void to_json(Json& j, const ConstructIteration& v) {
  j = Json{{"inputs", v.inputs}, {"feature_dim", v.feature_dim}, {"sufficient", v.sufficient},
           {"active", v.active}, {"reports", v.reports}};
}

void to_json(Json& j, const SufficientFeatures& v) {
  j = Json{{"variables", v.variables}, {"feature_dim", v.feature_dim}, {"empty", v.empty},
           {"sufficient", v.sufficient}, {"screening", v.screening},
           {"iterations", v.iterations}, {"feature_map", v.map}};
}

// ---------------------------------------------------------------------------
// Simulation and Q-learning

void to_json(Json& j, const GenerativeModelSpec& v) {
  j = Json{{"model", to_string(v.g)}, {"n_noise", v.n_noise}, {"seed", v.seed},
           {"state_dim", v.state_dim()}};
}

void from_json(const Json& j, GenerativeModelSpec& v) {
  check_keys(j, {"model", "n_noise", "seed", "state_dim"}, "generative model");
  if (auto it = j.find("model"); it != j.end()) v.g = parse_transition_function(it->get<std::string>());
  read(j, "n_noise", v.n_noise);
  read(j, "seed", v.seed);
  if (auto it = j.find("state_dim"); it != j.end() && it->get<std::size_t>() != v.state_dim())
    throw ValidationError("generative model: state_dim inconsistent with n_noise");
}

void to_json(Json& j, const QConfig& v) {
  j = Json{{"gamma", v.gamma}, {"epochs", v.epochs}, {"step0", v.step0},
           {"step_decay", v.step_decay}, {"hidden", v.hidden},
           {"activation", to_string(v.activation)}, {"standardize", v.standardize}};
}

void from_json(const Json& j, QConfig& v) {
  check_keys(j, {"gamma", "epochs", "step0", "step_decay", "hidden", "activation", "standardize"}, "q");
  read(j, "gamma", v.gamma);
  read(j, "epochs", v.epochs);
  read(j, "step0", v.step0);
  read(j, "step_decay", v.step_decay);
  read(j, "hidden", v.hidden);
  if (auto it = j.find("activation"); it != j.end())
    v.activation = parse_activation(it->get<std::string>());
  read(j, "standardize", v.standardize);
}

void to_json(Json& j, const QApproximator& v) {
  j = Json{{"kind", to_string(v.kind)}, {"gamma", v.gamma}, {"n_actions", v.n_actions},
           {"feature_dim", v.feature_dim}, {"feature_center", vector_to_json(v.feature_center)},
           {"feature_scale", vector_to_json(v.feature_scale)}};
  if (v.kind == QKind::linear) {
    j["linear"] = matrix_to_json(v.linear);
  } else {
    j["activation"] = to_string(v.activation);
    j["networks"] = v.networks;
  }
}

void from_json(const Json& j, QApproximator& v) {
  v.kind = parse_q_kind(j.at("kind").get<std::string>());
  v.gamma = j.at("gamma").get<double>();
  v.n_actions = j.at("n_actions").get<std::size_t>();
  v.feature_dim = j.at("feature_dim").get<std::size_t>();
  v.feature_center = vector_from_json(j.at("feature_center"));
  v.feature_scale = vector_from_json(j.at("feature_scale"));
  const auto d = static_cast<Eigen::Index>(v.feature_dim);
  if (v.feature_center.size() != d || v.feature_scale.size() != d)
    throw ValidationError("Q: standardization does not match the feature dimension");
  if (v.kind == QKind::linear) {
    v.linear = matrix_from_json(j.at("linear"));
    if (v.linear.rows() != static_cast<Eigen::Index>(v.n_actions) || v.linear.cols() != d + 1)
      throw ValidationError("Q: linear parameters have the wrong shape");
  } else {
    v.activation = parse_activation(j.at("activation").get<std::string>());
    v.networks = j.at("networks").get<std::vector<std::vector<DenseLayer>>>();
    if (v.networks.size() != v.n_actions) throw ValidationError("Q: one network per action required");
    for (const auto& net : v.networks)
      if (net.size() != 2 || net[0].weight.cols() != d || net[1].weight.rows() != 1 ||
          net[1].weight.cols() != net[0].weight.rows())
        throw ValidationError("Q: network has the wrong shape");
  }
}

void to_json(Json& j, const PolicyValue& v) {
  j = Json{{"mean_outcome", number(v.mean_outcome)}, {"std_error", number(v.std_error)},
           {"n_rollouts", v.n_rollouts}, {"horizon", v.horizon},
           {"definition", to_string(v.definition)}, {"gamma", v.gamma}, {"seed", v.seed}};
}

// ---------------------------------------------------------------------------
// Files

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace suffmdp
