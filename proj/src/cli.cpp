#include "suffmdp/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "suffmdp/adnn.hpp"
#include "suffmdp/error.hpp"
#include "suffmdp/experiment.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/qlearn.hpp"
#include "suffmdp/screening.hpp"
#include "suffmdp/serialize.hpp"

namespace suffmdp {

namespace {

namespace fs = std::filesystem;

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw ValidationError(std::string(flag) + ": no such file " + path);
}

void require_writable(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) throw ValidationError("output directory does not exist: " + parent.string());
}

void emit(const std::string& path, const Json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(path, j);
  }
}

// Accepts a bare feature map or a document holding one under "feature_map".
FeatureMap load_feature_map(const std::string& path) {
  const Json j = read_json_file(path);
  return (j.contains("feature_map") ? j.at("feature_map") : j).get<FeatureMap>();
}

struct Options {
  // simulate
  std::string model = "linear";
  std::size_t n_noise = 0, n = 30, horizon = 90;
  // shared
  std::uint64_t seed = 0;
  std::string out, data;
  std::optional<std::size_t> n_actions;
  // screen / construct
  std::optional<double> tau;
  std::optional<std::size_t> perms;
  std::optional<std::size_t> max_rounds;
  std::string grid_file, out_model, out_report, out_weights;
  // qlearn / evaluate
  std::string model_file, kind = "linear", gen_spec, q_file, definition = "per_step_mean";
  std::optional<double> gamma;
  std::optional<std::size_t> epochs;
  std::size_t rollouts = 100, eval_horizon = 90;
  // experiment
  std::string config;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> replicates, threads;
  std::string detail_out;
};

CsvSchema schema(const Options& o) {
  CsvSchema s;
  s.n_actions = o.n_actions;
  return s;
}

int cmd_simulate(const Options& o) {
  GenerativeModelSpec spec;
  spec.g = parse_transition_function(o.model);
  spec.n_noise = o.n_noise;
  spec.seed = o.seed;
  if (o.n == 0 || o.horizon == 0) throw ValidationError("--n and --t must be >= 1");
  if (o.out.empty()) throw ValidationError("--out is required");
  require_writable(o.out);
  const TrajectoryDataset ds = sample_trajectories(spec, o.n, o.horizon, o.seed);
  std::ostringstream text;
  write_dataset_csv(ds, text);
  write_text_file(o.out, text.str());
  return 0;
}

int cmd_screen(const Options& o) {
  require_file(o.data, "--data");
  require_writable(o.out);
  ScreenConfig cfg;
  if (o.tau) cfg.level = *o.tau;
  if (o.perms) cfg.permutations = *o.perms;
  cfg.max_rounds = o.max_rounds;
  const TrajectoryDataset ds = load_dataset_csv(o.data, schema(o));
  emit(o.out, Json(screen(ds, cfg, o.seed)));
  return 0;
}

std::string weights_csv(const SufficientFeatures& sf) {
  std::ostringstream out;
  out << "unit,variable,weight\n";
  for (const auto& c : sf.map.components())
    if (auto* net = std::get_if<NetworkComponent>(&c)) {
      const Matrix& w = net->layers.front().weight;
      for (Eigen::Index u = 0; u < w.rows(); ++u)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
          out << u + 1 << ',' << net->inputs[static_cast<std::size_t>(j)] + 1 << ','
              << format_double(w(u, j)) << '\n';
    }
  return out.str();
}

int cmd_construct(const Options& o) {
  require_file(o.data, "--data");
  for (const auto* p : {&o.out_model, &o.out_report, &o.out_weights}) require_writable(*p);
  ConstructConfig cfg;
  if (!o.grid_file.empty()) {
    require_file(o.grid_file, "--grid-file");
    const Json j = read_json_file(o.grid_file);
    if (j.is_array()) {
      cfg.selection.grid = j.get<std::vector<TuningCell>>();
      if (cfg.selection.grid.empty()) throw ValidationError("--grid-file: empty grid");
    } else {
      from_json(j, cfg);
    }
  }
  if (o.tau) cfg.screen.level = cfg.selection.test.level = *o.tau;
  if (o.perms) cfg.screen.permutations = cfg.selection.test.permutations = *o.perms;
  const TrajectoryDataset ds = load_dataset_csv(o.data, schema(o));
  const SufficientFeatures sf = construct_sufficient_features(ds, cfg, o.seed);

  Json model{{"feature_map", sf.map}, {"variables", sf.variables}, {"feature_dim", sf.feature_dim},
             {"empty", sf.empty}, {"sufficient", sf.sufficient}};
  if (sf.model) model["model"] = *sf.model;
  Json report = sf;
  report["config"] = cfg;
  report["seed"] = o.seed;
  if (!o.out_weights.empty()) write_text_file(o.out_weights, weights_csv(sf));
  if (!o.out_model.empty()) write_json_file(o.out_model, model);
  emit(o.out_report, report);
  return 0;
}

int cmd_qlearn(const Options& o) {
  require_file(o.data, "--data");
  require_file(o.model_file, "--model");
  require_writable(o.out);
  QConfig cfg;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.epochs) cfg.epochs = *o.epochs;
  cfg.seed = o.seed;
  const QKind kind = parse_q_kind(o.kind);
  const FeatureMap map = load_feature_map(o.model_file);
  const TrajectoryDataset ds = load_dataset_csv(o.data, schema(o));
  const QApproximator q = fit_q(make_q_data(make_transition_table(ds), map), kind, cfg);
  Json j = q;
  j["config"] = cfg;
  j["seed"] = o.seed;
  emit(o.out, j);
  return 0;
}

int cmd_evaluate(const Options& o) {
  require_file(o.gen_spec, "--gen-spec");
  require_file(o.model_file, "--model");
  require_file(o.q_file, "--q");
  require_writable(o.out);
  const GenerativeModelSpec spec = read_json_file(o.gen_spec).get<GenerativeModelSpec>();
  const FeatureMap map = load_feature_map(o.model_file);
  const QApproximator q = read_json_file(o.q_file).get<QApproximator>();
  const PolicyValue v = evaluate_policy(spec, map, q, o.rollouts, o.eval_horizon, o.seed,
                                        parse_value_definition(o.definition));
  emit(o.out, Json(v));
  return 0;
}

int cmd_experiment(const Options& o) {
  require_file(o.config, "--config");
  ExperimentConfig cfg = read_json_file(o.config).get<ExperimentConfig>();
  if (o.exp_seed) cfg.seed = *o.exp_seed;
  if (o.replicates) cfg.replicates = *o.replicates;
  if (!o.out.empty()) cfg.output = o.out;
  if (!o.detail_out.empty()) cfg.detail_output = o.detail_out;
  require_writable(cfg.output);
  require_writable(cfg.detail_output);
  const ExperimentResult result = run_experiment(cfg);
  const std::string csv = results_csv(result);
  if (!cfg.detail_output.empty()) write_json_file(cfg.detail_output, results_json(cfg, result));
  if (cfg.output.empty()) {
    std::cout << csv;
  } else {
    write_text_file(cfg.output, csv);
  }
  for (const auto& rep : result.replicates)
    for (const auto& m : rep.methods)
      if (!m.ok)
        std::cerr << "excluded: model=" << to_string(rep.model) << " noise=" << rep.n_noise
                  << " replicate=" << rep.replicate << " method=" << to_string(m.method) << ": "
                  << m.error << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sufficient Markov decision process feature construction"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "Worker threads (default: SUFFMDP_THREADS or all cores)");

  auto* sim = app.add_subcommand("simulate", "Sample trajectories from a simulation model");
  sim->add_option("--model", o.model, "linear|quad|exp")->capture_default_str();
  sim->add_option("--n-noise", o.n_noise, "Number of noise variables")->capture_default_str();
  sim->add_option("--n", o.n, "Subjects")->capture_default_str();
  sim->add_option("--t", o.horizon, "Decision points per subject")->capture_default_str();
  sim->add_option("--seed", o.seed)->capture_default_str();
  sim->add_option("--out", o.out, "Output CSV")->required();

  auto* scr = app.add_subcommand("screen", "Distance-covariance variable screening");
  scr->add_option("--data", o.data, "Trajectory CSV")->required();
  scr->add_option("--tau", o.tau, "Test level (default 0.1)");
  scr->add_option("--perms", o.perms, "Permutations per stratum (default 999)");
  scr->add_option("--max-rounds", o.max_rounds);
  scr->add_option("--n-actions", o.n_actions);
  scr->add_option("--seed", o.seed)->capture_default_str();
  scr->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* con = app.add_subcommand("construct", "Screening plus alternating-network feature construction");
  con->add_option("--data", o.data, "Trajectory CSV")->required();
  con->add_option("--tau", o.tau, "Level of screening and residual tests");
  con->add_option("--perms", o.perms, "Permutations per stratum");
  con->add_option("--grid-file", o.grid_file, "JSON tuning grid or construct configuration");
  con->add_option("--n-actions", o.n_actions);
  con->add_option("--seed", o.seed)->capture_default_str();
  con->add_option("--out-model", o.out_model, "Feature map and fitted network (JSON)");
  con->add_option("--out-report", o.out_report, "Construction report (JSON, default stdout)");
  con->add_option("--out-weights", o.out_weights, "First-layer input weights (CSV)");

  auto* ql = app.add_subcommand("qlearn", "Fit a Q approximator on a feature map");
  ql->add_option("--data", o.data, "Trajectory CSV")->required();
  ql->add_option("--model", o.model_file, "Feature map JSON")->required();
  ql->add_option("--kind", o.kind, "linear|nn")->capture_default_str();
  ql->add_option("--gamma", o.gamma, "Discount (default 0.9)");
  ql->add_option("--epochs", o.epochs);
  ql->add_option("--n-actions", o.n_actions);
  ql->add_option("--seed", o.seed)->capture_default_str();
  ql->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* ev = app.add_subcommand("evaluate", "Monte Carlo value of the greedy policy");
  ev->add_option("--gen-spec", o.gen_spec, "Simulation model JSON")->required();
  ev->add_option("--model", o.model_file, "Feature map JSON")->required();
  ev->add_option("--q", o.q_file, "Q approximator JSON")->required();
  ev->add_option("--rollouts", o.rollouts)->capture_default_str();
  ev->add_option("--horizon", o.eval_horizon)->capture_default_str();
  ev->add_option("--definition", o.definition, "per_step_mean|discounted")->capture_default_str();
  ev->add_option("--seed", o.seed)->capture_default_str();
  ev->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* ex = app.add_subcommand("experiment", "Monte Carlo comparison of feature maps");
  ex->add_option("--config", o.config, "Experiment JSON")->required();
  ex->add_option("--seed", o.exp_seed, "Overrides the config seed");
  ex->add_option("--replicates", o.replicates, "Overrides the config replicate count");
  ex->add_option("--out", o.out, "Results CSV (overrides config)");
  ex->add_option("--detail-out", o.detail_out, "Per-replicate JSON (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (o.threads) {
      if (*o.threads == 0) throw ValidationError("--threads must be >= 1");
      set_thread_count(*o.threads);
    }
    if (sim->parsed()) return cmd_simulate(o);
    if (scr->parsed()) return cmd_screen(o);
    if (con->parsed()) return cmd_construct(o);
    if (ql->parsed()) return cmd_qlearn(o);
    if (ev->parsed()) return cmd_evaluate(o);
    if (ex->parsed()) return cmd_experiment(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace suffmdp
