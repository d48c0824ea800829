#include "suffmdp/adnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

// ---------------------------------------------------------------------------
// Architecture and model

Architecture Architecture::from_tuning(std::size_t input_dim, std::size_t output_dim,
                                       std::size_t n_actions, std::size_t feature_dim,
                                       std::size_t width, std::size_t depth,
                                       Activation activation) {
  if (depth == 0) throw ValidationError("architecture: depth must be >= 1");
  Architecture a;
  a.input_dim = input_dim;
  a.output_dim = output_dim;
  a.n_actions = n_actions;
  a.feature_dim = feature_dim;
  a.feature_hidden.assign(depth - 1, width);
  a.head_hidden.assign(depth - 1, width);
  a.activation = activation;
  return a;
}

void Architecture::validate() const {
  auto positive = [](std::size_t v) { return v >= 1; };
  if (!positive(input_dim) || !positive(feature_dim) || !positive(output_dim) ||
      !positive(n_actions) || !std::all_of(feature_hidden.begin(), feature_hidden.end(), positive) ||
      !std::all_of(head_hidden.begin(), head_hidden.end(), positive))
    throw ValidationError("architecture: all widths must be >= 1");
}

namespace {

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden,
                               std::size_t out) {
  std::vector<std::size_t> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

}  // namespace

AdnnModel initialize_adnn(const Architecture& architecture, std::uint64_t seed) {
  architecture.validate();
  AdnnModel model;
  model.architecture = architecture;
  Rng rng = make_rng(seed, {stream::kInit});
  const auto fw = chain(architecture.input_dim, architecture.feature_hidden, architecture.feature_dim);
  for (std::size_t k = 0; k + 1 < fw.size(); ++k)
    model.feature_layers.push_back(glorot_layer(fw[k], fw[k + 1], rng));
  const auto hw = chain(architecture.feature_dim, architecture.head_hidden, architecture.output_dim);
  model.heads.resize(architecture.n_actions);
  for (auto& head : model.heads)
    for (std::size_t k = 0; k + 1 < hw.size(); ++k) head.push_back(glorot_layer(hw[k], hw[k + 1], rng));
  return model;
}

FeatureMap AdnnModel::feature_map(std::vector<std::size_t> inputs, std::size_t raw_dim) const {
  if (inputs.empty()) {
    inputs.resize(architecture.input_dim);
    std::iota(inputs.begin(), inputs.end(), std::size_t{0});
  }
  if (inputs.size() != architecture.input_dim)
    throw ValidationError("feature_map: input selection does not match the network");
  if (raw_dim == 0) raw_dim = *std::max_element(inputs.begin(), inputs.end()) + 1;
  return FeatureMap(raw_dim,
                    {NetworkComponent{std::move(inputs), feature_layers, architecture.activation}});
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

Matrix affine(const DenseLayer& layer, const Matrix& x) {
  Matrix z = layer.weight * x;
  z.colwise() += layer.bias;
  return z;
}

// Layer inputs and pre-activations in order: feature layers, then head layers.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
};

const std::vector<DenseLayer>& head_of(const AdnnModel& model, int action) {
  if (action < 1 || static_cast<std::size_t>(action) > model.heads.size())
    throw ValidationError("unknown action " + std::to_string(action));
  return model.heads[static_cast<std::size_t>(action - 1)];
}

Matrix forward(const AdnnModel& model, const Matrix& x, int action, ForwardTrace* trace) {
  const Activation f = model.architecture.activation;
  const auto& head = head_of(model, action);
  const std::size_t n_layers = model.feature_layers.size() + head.size();
  Matrix h = x;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const DenseLayer& layer = k < model.feature_layers.size()
                                  ? model.feature_layers[k]
                                  : head[k - model.feature_layers.size()];
    Matrix z = affine(layer, h);
    if (trace) trace->inputs.push_back(std::move(h));
    if (k + 1 == n_layers) {
      h = std::move(z);
    } else {
      h = z.unaryExpr([f](double v) { return activate(f, v); });
    }
    if (trace) trace->pre.push_back(std::move(z));
  }
  return h;
}

Matrix feature_batch(const AdnnModel& model, const Matrix& x) {
  return squashed_forward(model.feature_layers, model.architecture.activation, x);
}

void check_state(const AdnnModel& model, const Vector& state) {
  if (static_cast<std::size_t>(state.size()) != model.architecture.input_dim)
    throw ValidationError("state dimension " + std::to_string(state.size()) +
                          " does not match network input " +
                          std::to_string(model.architecture.input_dim));
}

AdnnGradient backward(const AdnnModel& model, const Matrix& x, const Matrix& y, double lambda,
                      int action) {
  const Activation f = model.architecture.activation;
  const auto& head = head_of(model, action);
  ForwardTrace trace;
  const Matrix pred = forward(model, x, action, &trace);
  const double m = static_cast<double>(x.cols());

  AdnnGradient grad;
  grad.action = action;
  grad.batch_loss = (pred - y).squaredNorm() / m;
  grad.feature.resize(model.feature_layers.size());
  grad.head.resize(head.size());

  const std::size_t n_feature = model.feature_layers.size();
  const std::size_t n_layers = n_feature + head.size();
  Matrix delta = (2.0 / m) * (pred - y);
  for (std::size_t k = n_layers; k-- > 0;) {
    const DenseLayer& layer = k < n_feature ? model.feature_layers[k] : head[k - n_feature];
    DenseLayer& g = k < n_feature ? grad.feature[k] : grad.head[k - n_feature];
    g.weight = delta * trace.inputs[k].transpose();
    g.bias = delta.rowwise().sum();
    if (k == 0) break;
    // trace.inputs[k] is the activated output of layer k - 1.
    const Matrix& value = trace.inputs[k];
    const Matrix& z = trace.pre[k - 1];
    Matrix back = layer.weight.transpose() * delta;
    for (Eigen::Index c = 0; c < back.cols(); ++c)
      for (Eigen::Index r = 0; r < back.rows(); ++r)
        back(r, c) *= activate_derivative(f, z(r, c), value(r, c));
    delta = std::move(back);
  }

  if (lambda > 0.0 && n_feature > 0) {
    const Matrix& w = model.feature_layers.front().weight;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double norm = w.col(j).norm();
      if (norm > 0.0) grad.feature.front().weight.col(j) += (lambda / norm) * w.col(j);
    }
  }
  return grad;
}

std::size_t distinct_subjects(const TransitionTable& table) {
  std::vector<std::size_t> s = table.subjects;
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

void check_table(const TransitionTable& table, const Architecture& arch) {
  if (table.size() == 0) throw ValidationError("no transitions");
  if (table.state_dim() != arch.input_dim)
    throw ValidationError("architecture input dimension does not match the data");
  if (table.response_dim() != arch.output_dim)
    throw ValidationError("architecture output dimension does not match the data");
  if (table.n_actions != arch.n_actions)
    throw ValidationError("architecture action count does not match the data");
}

}  // namespace

Vector feature_forward(const AdnnModel& model, const Vector& state) {
  check_state(model, state);
  return feature_batch(model, state);
}

Vector adnn_forward(const AdnnModel& model, const Vector& state, int action) {
  check_state(model, state);
  return forward(model, state, action, nullptr);
}

Matrix adnn_predict(const AdnnModel& model, const TransitionTable& table) {
  check_table(table, model.architecture);
  Matrix out(static_cast<Eigen::Index>(table.size()),
             static_cast<Eigen::Index>(model.architecture.output_dim));
  for (std::size_t a = 1; a <= model.architecture.n_actions; ++a) {
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < table.size(); ++r)
      if (table.actions[r] == static_cast<int>(a)) rows.push_back(static_cast<Eigen::Index>(r));
    if (rows.empty()) continue;
    Matrix x(table.states.cols(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
      x.col(static_cast<Eigen::Index>(k)) = table.states.row(rows[k]).transpose();
    const Matrix pred = forward(model, x, static_cast<int>(a), nullptr);
    for (std::size_t k = 0; k < rows.size(); ++k)
      out.row(rows[k]) = pred.col(static_cast<Eigen::Index>(k)).transpose();
  }
  return out;
}

double group_lasso_penalty(const Matrix& first_weight) { return column_norms(first_weight).sum(); }

double adnn_cost(const TransitionTable& table, const AdnnModel& model, double lambda) {
  const Matrix pred = adnn_predict(model, table);
  const double fit = (pred - table.responses).squaredNorm() / static_cast<double>(distinct_subjects(table));
  const double penalty =
      model.feature_layers.empty() ? 0.0 : group_lasso_penalty(model.feature_layers.front().weight);
  return fit + lambda * penalty;
}

AdnnGradient adnn_subgradient(const TransitionTable& table, std::span<const std::size_t> rows,
                              const AdnnModel& model, double lambda, int action) {
  if (rows.empty()) throw ValidationError("subgradient: empty batch");
  check_table(table, model.architecture);
  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix x(table.states.cols(), m), y(table.responses.cols(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::size_t r = rows[static_cast<std::size_t>(k)];
    if (table.actions[r] != action) throw ValidationError("subgradient: batch mixes actions");
    x.col(k) = table.states.row(static_cast<Eigen::Index>(r)).transpose();
    y.col(k) = table.responses.row(static_cast<Eigen::Index>(r)).transpose();
  }
  return backward(model, x, y, lambda, action);
}

AdnnGradient adnn_subgradient(std::span<const Transition> batch, const AdnnModel& model,
                              double lambda, int action) {
  if (batch.empty()) throw ValidationError("subgradient: empty batch");
  const auto m = static_cast<Eigen::Index>(batch.size());
  const auto p = batch.front().state.size();
  Matrix x(p, m), y(p + 1, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Transition& tr = batch[static_cast<std::size_t>(k)];
    if (tr.action != action) throw ValidationError("subgradient: batch mixes actions");
    if (tr.state.size() != p || tr.next_state.size() != p)
      throw ValidationError("subgradient: inconsistent state dimensions");
    x.col(k) = tr.state;
    y(0, k) = tr.utility;
    y.col(k).tail(p) = tr.next_state;
  }
  check_state(model, x.col(0));
  if (static_cast<std::size_t>(y.rows()) != model.architecture.output_dim)
    throw ValidationError("subgradient: response dimension does not match the network");
  return backward(model, x, y, lambda, action);
}

// ---------------------------------------------------------------------------
// Training

namespace {

void apply_step(std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grad, double step) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight.noalias() -= step * grad[k].weight;
    layers[k].bias.noalias() -= step * grad[k].bias;
  }
}

void validate_fit_config(const FitConfig& c) {
  if (!(c.lambda >= 0.0)) throw ValidationError("fit: lambda must be >= 0");
  if (!(c.batch_fraction > 0.0 && c.batch_fraction < 1.0))
    throw ValidationError("fit: batch fraction must lie in (0, 1)");
  if (!(c.step0 > 0.0) || !(c.step_decay > 0.0)) throw ValidationError("fit: step sizes must be > 0");
  if (!(c.tolerance > 0.0)) throw ValidationError("fit: tolerance must be > 0");
  if (c.cost_check_interval == 0) throw ValidationError("fit: cost check interval must be >= 1");
}

}  // namespace

AdnnModel fit_adnn(const TransitionTable& table, const Architecture& architecture,
                   const FitConfig& config) {
  architecture.validate();
  validate_fit_config(config);
  check_table(table, architecture);

  const std::size_t K = architecture.n_actions;
  const double n_subjects = static_cast<double>(distinct_subjects(table));
  std::vector<std::vector<std::size_t>> rows(K);
  for (std::size_t r = 0; r < table.size(); ++r) rows[static_cast<std::size_t>(table.actions[r] - 1)].push_back(r);
  std::vector<std::size_t> batch_size(K);
  for (std::size_t a = 0; a < K; ++a) {
    if (rows[a].empty()) throw ValidationError("action " + std::to_string(a + 1) + " absent from data");
    batch_size[a] = static_cast<std::size_t>(
        std::floor(config.batch_fraction * static_cast<double>(rows[a].size())));
    if (batch_size[a] == 0) throw ValidationError("batch fraction too small");
  }

  AdnnModel model = initialize_adnn(architecture, config.seed);
  if (config.max_iterations == 0) return model;

  // Per-action column blocks for the cost and for batch gathering.
  const Matrix xt = table.states.transpose();
  const Matrix yt = table.responses.transpose();
  std::vector<Matrix> xa(K), ya(K);
  for (std::size_t a = 0; a < K; ++a) {
    xa[a].resize(xt.rows(), static_cast<Eigen::Index>(rows[a].size()));
    ya[a].resize(yt.rows(), static_cast<Eigen::Index>(rows[a].size()));
    for (std::size_t k = 0; k < rows[a].size(); ++k) {
      xa[a].col(static_cast<Eigen::Index>(k)) = xt.col(static_cast<Eigen::Index>(rows[a][k]));
      ya[a].col(static_cast<Eigen::Index>(k)) = yt.col(static_cast<Eigen::Index>(rows[a][k]));
    }
  }

  auto action_costs = [&] {
    const double penalty = config.lambda * group_lasso_penalty(model.feature_layers.front().weight);
    std::vector<double> cost(K);
    for (std::size_t a = 0; a < K; ++a) {
      const Matrix pred = forward(model, xa[a], static_cast<int>(a + 1), nullptr);
      cost[a] = (pred - ya[a]).squaredNorm() / n_subjects + penalty;
    }
    return cost;
  };

  Rng rng = make_rng(config.seed, {stream::kBatch});
  std::vector<std::vector<Eigen::Index>> order(K);
  for (std::size_t a = 0; a < K; ++a) {
    order[a].resize(rows[a].size());
    std::iota(order[a].begin(), order[a].end(), Eigen::Index{0});
  }

  std::vector<double> previous = action_costs();
  model.trace.push_back(previous);
  for (std::size_t b = 1; b <= config.max_iterations; ++b) {
    const double step = config.step(b);
    for (std::size_t a = 0; a < K; ++a) {
      // Partial Fisher-Yates: the first batch_size entries are a uniform
      // sample without replacement.
      auto& idx = order[a];
      const std::size_t n_a = idx.size();
      Matrix x(xa[a].rows(), static_cast<Eigen::Index>(batch_size[a]));
      Matrix y(ya[a].rows(), static_cast<Eigen::Index>(batch_size[a]));
      for (std::size_t k = 0; k < batch_size[a]; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n_a - 1);
        std::swap(idx[k], idx[pick(rng)]);
        x.col(static_cast<Eigen::Index>(k)) = xa[a].col(idx[k]);
        y.col(static_cast<Eigen::Index>(k)) = ya[a].col(idx[k]);
      }
      const AdnnGradient grad = backward(model, x, y, config.lambda, static_cast<int>(a + 1));
      apply_step(model.feature_layers, grad.feature, step);
      apply_step(model.heads[a], grad.head, step);
    }
    model.iterations = b;

    if (b % config.cost_check_interval != 0 && b != config.max_iterations) continue;
    std::vector<double> cost = action_costs();
    for (double c : cost)
      if (!std::isfinite(c))
        throw NumericalError("training diverged at iteration " + std::to_string(b));
    double change = 0.0;
    for (std::size_t a = 0; a < K; ++a) change = std::max(change, std::abs(cost[a] - previous[a]));
    model.trace.push_back(cost);
    previous = std::move(cost);
    if (change <= config.tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

AdnnModel fit_adnn(const TrajectoryDataset& ds, const Architecture& architecture,
                   const FitConfig& config) {
  return fit_adnn(make_transition_table(ds), architecture, config);
}

// ---------------------------------------------------------------------------
// Tuning

std::vector<TuningCell> tuning_grid(std::span<const std::size_t> widths,
                                    std::span<const std::size_t> depths,
                                    std::span<const double> lambdas) {
  std::vector<TuningCell> cells;
  for (std::size_t w : widths)
    for (std::size_t d : depths)
      for (double l : lambdas) cells.push_back(TuningCell{w, d, l});
  return cells;
}

std::vector<TuningCell> default_tuning_grid() {
  const std::size_t widths[] = {2, 4, 8};
  const std::size_t depths[] = {1, 2};
  const double lambdas[] = {0.001, 0.01, 0.1, 1.0};
  return tuning_grid(widths, depths, lambdas);
}

CvResult cross_validate_adnn(const TransitionTable& table, std::size_t feature_dim,
                             std::span<const TuningCell> grid, std::size_t folds,
                             const FitConfig& config, std::uint64_t seed, Activation activation) {
  if (grid.empty()) throw ValidationError("cross-validation: empty grid");
  if (folds < 2) throw ValidationError("cross-validation: need at least 2 folds");
  const std::size_t n = distinct_subjects(table);
  if (folds > n) throw ValidationError("cross-validation: more folds than subjects");

  CvResult result;
  result.cells.assign(grid.begin(), grid.end());
  result.scores.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (grid.size() == 1) {
    result.best = grid.front();
    return result;
  }

  // Whole subjects go to one fold.
  std::vector<std::size_t> present;
  {
    std::vector<bool> seen(table.n_subjects, false);
    for (std::size_t s : table.subjects)
      if (!seen[s]) {
        seen[s] = true;
        present.push_back(s);
      }
  }
  Rng rng = make_rng(seed, {stream::kFolds});
  std::shuffle(present.begin(), present.end(), rng);
  std::vector<std::size_t> fold_of(table.n_subjects, 0);
  for (std::size_t k = 0; k < present.size(); ++k) fold_of[present[k]] = k % folds;

  std::vector<double> fold_scores(grid.size() * folds);
  parallel_for(grid.size() * folds, [&](std::size_t task) {
    const std::size_t c = task / folds, f = task % folds;
    std::vector<bool> train(table.n_subjects), held(table.n_subjects);
    for (std::size_t s : present) {
      train[s] = fold_of[s] != f;
      held[s] = fold_of[s] == f;
    }
    const TransitionTable train_table = select_subjects(table, train);
    const TransitionTable test_table = select_subjects(table, held);
    const TuningCell& cell = grid[c];
    const Architecture arch =
        Architecture::from_tuning(table.state_dim(), table.response_dim(), table.n_actions,
                                  feature_dim, cell.width, cell.depth, activation);
    FitConfig fc = config;
    fc.lambda = cell.lambda;
    // Keyed on the cell's contents so duplicate cells score identically.
    fc.seed = derive_seed(seed, {stream::kCell, cell.width, cell.depth,
                                 std::bit_cast<std::uint64_t>(cell.lambda), f});
    const AdnnModel model = fit_adnn(train_table, arch, fc);
    const Matrix pred = adnn_predict(model, test_table);
    fold_scores[task] =
        (pred - test_table.responses).squaredNorm() / static_cast<double>(test_table.size());
  });

  for (std::size_t c = 0; c < grid.size(); ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) sum += fold_scores[c * folds + f];
    result.scores[c] = sum / static_cast<double>(folds);
  }
  std::size_t best = 0;
  auto key = [&](std::size_t c) {
    return std::make_tuple(result.scores[c], grid[c].depth, grid[c].width, -grid[c].lambda);
  };
  for (std::size_t c = 1; c < grid.size(); ++c)
    if (key(c) < key(best)) best = c;
  result.best = grid[best];
  return result;
}

// ---------------------------------------------------------------------------
// Sufficiency checks

TestReport residual_independence_pvalue(const TransitionTable& table, const Matrix& predictions,
                                        const StratifiedTestConfig& config, std::uint64_t seed) {
  if (predictions.rows() != table.responses.rows() || predictions.cols() != table.responses.cols())
    throw ValidationError("residual test: predictions do not match the responses");
  StratifiedSample sample;
  sample.g = table.responses - predictions;
  sample.h = table.states;
  sample.times = table.times;
  sample.actions = table.actions;
  return stratified_pooled_test(sample, config, seed);
}

TestReport residual_independence_pvalue(const TransitionTable& table, const AdnnModel& model,
                                        const StratifiedTestConfig& config, std::uint64_t seed) {
  return residual_independence_pvalue(table, adnn_predict(model, table), config, seed);
}

DimensionSelection select_feature_dimension(const TransitionTable& table,
                                            const SelectionConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> dims = config.dims;
  if (dims.empty()) {
    dims.resize(table.state_dim());
    std::iota(dims.begin(), dims.end(), std::size_t{1});
  }
  if (dims.front() == 0 || !std::is_sorted(dims.begin(), dims.end()) ||
      std::adjacent_find(dims.begin(), dims.end()) != dims.end())
    throw ValidationError("dimension selection: candidates must be positive and strictly ascending");

  DimensionSelection out;
  for (std::size_t r : dims) {
    const CvResult cv = cross_validate_adnn(table, r, config.grid, config.folds, config.fit,
                                            derive_seed(seed, {stream::kCell, r}), config.activation);
    const Architecture arch =
        Architecture::from_tuning(table.state_dim(), table.response_dim(), table.n_actions, r,
                                  cv.best.width, cv.best.depth, config.activation);
    FitConfig fc = config.fit;
    fc.lambda = cv.best.lambda;
    fc.seed = derive_seed(seed, {stream::kDimension, r});
    AdnnModel model = fit_adnn(table, arch, fc);
    TestReport test = residual_independence_pvalue(table, model, config.test,
                                                   derive_seed(seed, {stream::kResidual, r}));
    const bool pass = !test.reject;
    out.reports.push_back(DimensionReport{r, cv.best, cv.scores, std::move(test)});
    out.feature_dim = r;
    out.model = std::move(model);
    if (pass) {
      out.sufficient = true;
      break;
    }
  }
  return out;
}

std::vector<std::size_t> active_inputs(const AdnnModel& model, double relative_tolerance) {
  if (model.feature_layers.empty()) return {};
  return active_columns(model.feature_layers.front().weight, relative_tolerance);
}

SufficientFeatures construct_sufficient_features(const TrajectoryDataset& ds,
                                                 const ConstructConfig& config,
                                                 std::uint64_t seed) {
  if (config.max_outer == 0) throw ValidationError("construct: max_outer must be >= 1");
  SufficientFeatures out;
  std::vector<std::size_t> columns(ds.state_dim());
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  if (config.screen_first) {
    out.screening = screen(ds, config.screen, derive_seed(seed, {stream::kScreen}));
    columns = out.screening.selected;
    if (columns.empty()) {
      out.empty = true;
      out.map = FeatureMap(ds.state_dim(), {});
      return out;
    }
  }

  for (std::size_t outer = 1; outer <= config.max_outer; ++outer) {
    const TransitionTable table = make_transition_table(ds.select_columns(columns));
    SelectionConfig sc = config.selection;
    std::erase_if(sc.dims, [&](std::size_t r) { return r > columns.size(); });
    if (sc.dims.empty() && !config.selection.dims.empty()) sc.dims = {columns.size()};
    DimensionSelection sel =
        select_feature_dimension(table, sc, derive_seed(seed, {stream::kOuter, outer}));

    ConstructIteration it;
    it.inputs = columns;
    it.feature_dim = sel.feature_dim;
    it.sufficient = sel.sufficient;
    for (std::size_t j : active_inputs(sel.model, config.column_tolerance)) it.active.push_back(columns[j]);
    it.reports = sel.reports;
    out.iterations.push_back(it);

    out.map = sel.model.feature_map(columns, ds.state_dim());
    out.variables = it.active;
    out.feature_dim = sel.feature_dim;
    out.sufficient = sel.sufficient;
    out.model = std::move(sel.model);

    if (it.active.empty() || it.active.size() == columns.size()) break;
    columns = it.active;
  }
  return out;
}

}  // namespace suffmdp
