#include "suffmdp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "suffmdp/baselines.hpp"
#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

std::string to_string(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::oracle: return "oracle";
    case FeatureMethod::adnn: return "adnn";
    case FeatureMethod::tnn: return "tnn";
    case FeatureMethod::pca: return "pca";
    case FeatureMethod::raw: break;
  }
  return "raw";
}

FeatureMethod parse_feature_method(std::string_view name) {
  if (name == "raw") return FeatureMethod::raw;
  if (name == "oracle") return FeatureMethod::oracle;
  if (name == "adnn") return FeatureMethod::adnn;
  if (name == "tnn") return FeatureMethod::tnn;
  if (name == "pca") return FeatureMethod::pca;
  throw ValidationError("unknown feature method '" + std::string(name) + "'");
}

void to_json(Json& j, const ExperimentConfig& v) {
  Json models = Json::array(), methods = Json::array(), qs = Json::array();
  for (auto g : v.models) models.push_back(to_string(g));
  for (auto m : v.methods) methods.push_back(to_string(m));
  for (auto k : v.q_methods) qs.push_back(to_string(k));
  j = Json{{"models", models}, {"noise", v.noise}, {"n", v.n}, {"horizon", v.horizon},
           {"replicates", v.replicates}, {"methods", methods},
           {"oracle", to_string(v.oracle)}, {"q_methods", qs}, {"construct", v.construct},
           {"tnn", v.tnn}, {"pca_variance", v.pca_variance}, {"q", v.q},
           {"rollouts", v.rollouts}, {"eval_horizon", v.eval_horizon},
           {"definition", to_string(v.definition)}, {"seed", v.seed}, {"output", v.output},
           {"detail_output", v.detail_output}};
}

void from_json(const Json& j, ExperimentConfig& v) {
  if (!j.is_object()) throw ValidationError("experiment: expected a JSON object");
  static const char* allowed[] = {"models", "noise", "n", "horizon", "replicates", "methods",
                                  "oracle", "q_methods", "construct", "tnn", "pca_variance", "q",
                                  "rollouts", "eval_horizon", "definition", "seed", "output",
                                  "detail_output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(std::begin(allowed), std::end(allowed), it.key()) == std::end(allowed))
      throw ValidationError("experiment: unknown key '" + it.key() + "'");
  if (auto it = j.find("models"); it != j.end()) {
    v.models.clear();
    for (const auto& m : *it) v.models.push_back(parse_transition_function(m.get<std::string>()));
  }
  if (auto it = j.find("methods"); it != j.end()) {
    v.methods.clear();
    for (const auto& m : *it) v.methods.push_back(parse_feature_method(m.get<std::string>()));
  }
  if (auto it = j.find("q_methods"); it != j.end()) {
    v.q_methods.clear();
    for (const auto& m : *it) v.q_methods.push_back(parse_q_kind(m.get<std::string>()));
  }
  if (auto it = j.find("noise"); it != j.end()) v.noise = it->get<std::vector<std::size_t>>();
  if (auto it = j.find("n"); it != j.end()) v.n = it->get<std::size_t>();
  if (auto it = j.find("horizon"); it != j.end()) v.horizon = it->get<std::size_t>();
  if (auto it = j.find("replicates"); it != j.end()) v.replicates = it->get<std::size_t>();
  if (auto it = j.find("oracle"); it != j.end()) v.oracle = parse_oracle_variant(it->get<std::string>());
  if (auto it = j.find("construct"); it != j.end()) from_json(*it, v.construct);
  if (auto it = j.find("tnn"); it != j.end()) from_json(*it, v.tnn);
  if (auto it = j.find("pca_variance"); it != j.end()) v.pca_variance = it->get<double>();
  if (auto it = j.find("q"); it != j.end()) from_json(*it, v.q);
  if (auto it = j.find("rollouts"); it != j.end()) v.rollouts = it->get<std::size_t>();
  if (auto it = j.find("eval_horizon"); it != j.end()) v.eval_horizon = it->get<std::size_t>();
  if (auto it = j.find("definition"); it != j.end())
    v.definition = parse_value_definition(it->get<std::string>());
  if (auto it = j.find("seed"); it != j.end()) v.seed = it->get<std::uint64_t>();
  if (auto it = j.find("output"); it != j.end()) v.output = it->get<std::string>();
  if (auto it = j.find("detail_output"); it != j.end()) v.detail_output = it->get<std::string>();
}

namespace {

void validate(const ExperimentConfig& c) {
  if (c.models.empty() || c.noise.empty() || c.methods.empty())
    throw ValidationError("experiment: models, noise and methods must be nonempty");
  if (c.n == 0 || c.horizon == 0 || c.replicates == 0)
    throw ValidationError("experiment: n, horizon and replicates must be >= 1");
  if (c.rollouts == 0 || c.eval_horizon == 0)
    throw ValidationError("experiment: rollouts and eval_horizon must be >= 1");
  if (!(c.q.gamma > 0.0 && c.q.gamma < 1.0)) throw ValidationError("experiment: gamma must lie in (0, 1)");
  if (!(c.pca_variance > 0.0 && c.pca_variance <= 1.0))
    throw ValidationError("experiment: pca_variance must lie in (0, 1]");
}

ExperimentConfig halved(ExperimentConfig c) {
  c.construct.selection.fit.step0 /= 2.0;
  c.tnn.fit.step0 /= 2.0;
  c.q.step0 /= 2.0;
  return c;
}

MethodOutcome run_method(FeatureMethod method, const ExperimentConfig& cfg,
                         const GenerativeModelSpec& spec, const TrajectoryDataset& ds,
                         const TransitionTable& table, std::uint64_t rep_seed) {
  const auto mkey = static_cast<std::uint64_t>(method);
  const std::uint64_t rollout_seed = derive_seed(rep_seed, {stream::kRollout});
  MethodOutcome out;
  out.method = method;
  for (std::size_t attempt = 0; attempt < 2; ++attempt) {
    const ExperimentConfig c = attempt == 0 ? cfg : halved(cfg);
    out.retries = attempt;
    try {
      MethodFeatures f = build_features(method, c, spec, ds, derive_seed(rep_seed, {stream::kOuter, mkey}));
      out.n_var = f.n_var;
      out.n_dim = f.n_dim;
      const QData data = make_q_data(table, f.map);
      out.values.clear();
      for (QKind k : c.q_methods) {
        QConfig qc = c.q;
        qc.seed = derive_seed(rep_seed, {stream::kQ, mkey, static_cast<std::uint64_t>(k)});
        const QApproximator q = fit_q(data, k, qc);
        out.values.push_back(evaluate_policy(spec, f.map, q, c.rollouts, c.eval_horizon,
                                             rollout_seed, c.definition));
      }
      out.ok = true;
      out.error.clear();
      return out;
    } catch (const NumericalError& e) {
      out.error = e.what();  // retried once with halved steps
    } catch (const std::exception& e) {
      out.error = e.what();
      break;
    }
  }
  out.values.assign(cfg.q_methods.size(), std::nullopt);
  return out;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(x.size());
}

double se_of(const std::vector<double>& x) {
  if (x.size() < 2) return x.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

std::string csv_number(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

}  // namespace

MethodFeatures build_features(FeatureMethod method, const ExperimentConfig& cfg,
                              const GenerativeModelSpec& spec, const TrajectoryDataset& ds,
                              std::uint64_t seed) {
  const std::size_t p = ds.state_dim();
  MethodFeatures f;
  switch (method) {
    case FeatureMethod::raw:
      f.map = FeatureMap::identity(p);
      f.n_var = f.n_dim = p;
      break;
    case FeatureMethod::oracle:
      f.map = oracle_feature_map(spec, cfg.oracle);
      f.n_var = cfg.oracle == OracleVariant::first16 ? 16 : 4;
      f.n_dim = f.map.output_dim();
      break;
    case FeatureMethod::pca: {
      PcaResult pca = pca_feature_map(ds, cfg.pca_variance);
      f.map = std::move(pca.map);
      f.n_var = p;
      f.n_dim = pca.n_components;
      break;
    }
    case FeatureMethod::tnn: {
      TnnResult tnn = fit_tnn(ds, cfg.tnn, seed, cfg.construct.column_tolerance);
      f.map = std::move(tnn.map);
      f.n_var = tnn.variables.size();
      f.n_dim = tnn.feature_dim;
      break;
    }
    case FeatureMethod::adnn: {
      SufficientFeatures sf = construct_sufficient_features(ds, cfg.construct, seed);
      if (sf.empty) throw ValidationError("screening selected no variables");
      f.map = std::move(sf.map);
      f.n_var = sf.variables.size();
      f.n_dim = sf.feature_dim;
      break;
    }
  }
  return f;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult result;
  result.q_methods = cfg.q_methods;

  const std::size_t per_cell = cfg.replicates;
  const std::size_t n_tasks = cfg.models.size() * cfg.noise.size() * per_cell;
  result.replicates.resize(n_tasks);
  parallel_for(n_tasks, [&](std::size_t task) {
    const std::size_t r = task % per_cell;
    const std::size_t cell = task / per_cell;
    const std::size_t k = cell % cfg.noise.size();
    const std::size_t m = cell / cfg.noise.size();
    GenerativeModelSpec spec;
    spec.g = cfg.models[m];
    spec.n_noise = cfg.noise[k];
    const std::uint64_t rep_seed = derive_seed(
        cfg.seed, {stream::kReplicate, static_cast<std::uint64_t>(spec.g), spec.n_noise, r});
    spec.seed = derive_seed(rep_seed, {stream::kSubject});
    const TrajectoryDataset ds = sample_trajectories(spec, cfg.n, cfg.horizon, spec.seed);
    const TransitionTable table = make_transition_table(ds);

    ReplicateOutcome& rep = result.replicates[task];
    rep.model = spec.g;
    rep.n_noise = spec.n_noise;
    rep.replicate = r;
    rep.seed = rep_seed;
    for (FeatureMethod method : cfg.methods)
      rep.methods.push_back(run_method(method, cfg, spec, ds, table, rep_seed));
  });

  for (std::size_t m = 0; m < cfg.models.size(); ++m)
    for (std::size_t k = 0; k < cfg.noise.size(); ++k)
      for (std::size_t f = 0; f < cfg.methods.size(); ++f) {
        ExperimentRow row;
        row.model = cfg.models[m];
        row.n_noise = cfg.noise[k];
        row.method = cfg.methods[f];
        std::vector<std::vector<double>> q(cfg.q_methods.size());
        std::vector<double> nv, nd;
        for (std::size_t r = 0; r < per_cell; ++r) {
          const MethodOutcome& o = result.replicates[(m * cfg.noise.size() + k) * per_cell + r].methods[f];
          if (!o.ok) {
            ++row.n_failed;
            continue;
          }
          ++row.n_ok;
          nv.push_back(static_cast<double>(o.n_var));
          nd.push_back(static_cast<double>(o.n_dim));
          for (std::size_t qk = 0; qk < q.size(); ++qk) q[qk].push_back(o.values[qk]->mean_outcome);
        }
        for (const auto& v : q) {
          row.q_mean.push_back(mean_of(v));
          row.q_se.push_back(se_of(v));
        }
        row.n_var_mean = mean_of(nv);
        row.n_var_se = se_of(nv);
        row.n_dim_mean = mean_of(nd);
        row.n_dim_se = se_of(nd);
        result.rows.push_back(std::move(row));
      }
  return result;
}

std::string results_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "model,n_noise,method";
  for (QKind k : result.q_methods) out << ',' << to_string(k) << "_q_mean," << to_string(k) << "_q_se";
  out << ",n_var_mean,n_var_se,n_dim_mean,n_dim_se,n_ok,n_failed\n";
  for (const auto& row : result.rows) {
    out << to_string(row.model) << ',' << row.n_noise << ',' << to_string(row.method);
    for (std::size_t k = 0; k < row.q_mean.size(); ++k)
      out << ',' << csv_number(row.q_mean[k]) << ',' << csv_number(row.q_se[k]);
    out << ',' << csv_number(row.n_var_mean) << ',' << csv_number(row.n_var_se) << ','
        << csv_number(row.n_dim_mean) << ',' << csv_number(row.n_dim_se) << ',' << row.n_ok << ','
        << row.n_failed << '\n';
  }
  return out.str();
}

Json results_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  Json reps = Json::array();
  for (const auto& rep : result.replicates) {
    Json methods = Json::array();
    for (const auto& o : rep.methods) {
      Json values = Json::object();
      for (std::size_t k = 0; k < result.q_methods.size(); ++k)
        values[to_string(result.q_methods[k])] =
            k < o.values.size() && o.values[k] ? Json(*o.values[k]) : Json(nullptr);
      methods.push_back(Json{{"method", to_string(o.method)}, {"ok", o.ok}, {"error", o.error},
                             {"retries", o.retries}, {"n_var", o.n_var}, {"n_dim", o.n_dim},
                             {"values", values}});
    }
    reps.push_back(Json{{"model", to_string(rep.model)}, {"n_noise", rep.n_noise},
                        {"replicate", rep.replicate}, {"seed", rep.seed}, {"methods", methods}});
  }
  return Json{{"config", cfg}, {"replicates", reps}};
}

}  // namespace suffmdp
