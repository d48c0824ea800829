#include "suffmdp/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

std::string to_string(QKind k) { return k == QKind::neural ? "nn" : "linear"; }

QKind parse_q_kind(std::string_view name) {
  if (name == "linear") return QKind::linear;
  if (name == "nn" || name == "neural") return QKind::neural;
  throw ValidationError("unknown Q approximator '" + std::string(name) + "' (expected linear|nn)");
}

std::string to_string(ValueDefinition d) {
  return d == ValueDefinition::discounted ? "discounted" : "per_step_mean";
}

ValueDefinition parse_value_definition(std::string_view name) {
  if (name == "per_step_mean") return ValueDefinition::per_step_mean;
  if (name == "discounted") return ValueDefinition::discounted;
  throw ValidationError("unknown value definition '" + std::string(name) + "'");
}

QData make_q_data(const TransitionTable& table, const FeatureMap& map) {
  if (map.input_dim() != table.state_dim())
    throw ValidationError("feature map input dimension does not match the data");
  const Eigen::Index p = table.responses.cols() - 1;
  QData d;
  d.features = map.apply_rows(table.states);
  d.next_features = map.apply_rows(table.responses.rightCols(p));
  d.utilities = table.responses.col(0);
  d.actions = table.actions;
  d.n_actions = table.n_actions;
  return d;
}

namespace {

void validate(const QData& data, const QConfig& cfg) {
  if (data.features.cols() == 0) throw ValidationError("Q-learning: empty feature");
  if (data.features.rows() == 0) throw ValidationError("Q-learning: no transitions");
  if (data.next_features.rows() != data.features.rows() ||
      data.next_features.cols() != data.features.cols() ||
      data.utilities.size() != data.features.rows() ||
      static_cast<Eigen::Index>(data.actions.size()) != data.features.rows())
    throw ValidationError("Q-learning: inconsistent transition arrays");
  if (data.n_actions == 0) throw ValidationError("Q-learning: no actions");
  for (int a : data.actions)
    if (a < 1 || static_cast<std::size_t>(a) > data.n_actions)
      throw ValidationError("Q-learning: action out of range");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("Q-learning: gamma must lie in (0, 1)");
  if (!(cfg.step0 > 0.0) || !(cfg.step_decay > 0.0))
    throw ValidationError("Q-learning: step sizes must be > 0");
}

QApproximator base(const QData& data, const QConfig& cfg, QKind kind) {
  QApproximator q;
  q.kind = kind;
  q.gamma = cfg.gamma;
  q.n_actions = data.n_actions;
  q.feature_dim = static_cast<std::size_t>(data.features.cols());
  q.activation = cfg.activation;
  const Eigen::Index d = data.features.cols();
  q.feature_center = Vector::Zero(d);
  q.feature_scale = Vector::Ones(d);
  if (cfg.standardize) {
    q.feature_center = data.features.colwise().mean().transpose();
    const Matrix c = data.features.rowwise() - q.feature_center.transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
      const double sd = std::sqrt(c.col(j).squaredNorm() / static_cast<double>(c.rows()));
      q.feature_scale(j) = sd > 1e-12 ? sd : 1.0;
    }
  }
  return q;
}

Matrix standardized(const QApproximator& q, const Matrix& f) {
  Matrix z = f.rowwise() - q.feature_center.transpose();
  return z.array().rowwise() / q.feature_scale.transpose().array();
}

double nn_value(const std::vector<DenseLayer>& net, Activation f, const Vector& z,
                Vector* hidden = nullptr, Vector* pre = nullptr) {
  Vector zh = net[0].weight * z + net[0].bias;
  Vector h = zh.unaryExpr([f](double v) { return activate(f, v); });
  const double out = net[1].weight.row(0).dot(h) + net[1].bias(0);
  if (hidden) *hidden = std::move(h);
  if (pre) *pre = std::move(zh);
  return out;
}

void check_finite(const QApproximator& q, std::size_t epoch) {
  bool ok = q.linear.allFinite();
  for (const auto& net : q.networks)
    for (const auto& l : net) ok = ok && l.weight.allFinite() && l.bias.allFinite();
  if (!ok) throw NumericalError("Q-learning diverged in epoch " + std::to_string(epoch + 1));
}

template <class Update>
void run_epochs(const QData& data, const QConfig& cfg, QApproximator& q, double scale,
                Update&& update) {
  Rng rng = make_rng(cfg.seed, {stream::kQ});
  std::vector<std::size_t> order(static_cast<std::size_t>(data.features.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const double alpha = cfg.step0 / (1.0 + static_cast<double>(e) / cfg.step_decay) / scale;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r : order) update(r, alpha);
    check_finite(q, e);
  }
}

}  // namespace

Vector QApproximator::values(const Vector& feature) const {
  if (static_cast<std::size_t>(feature.size()) != feature_dim)
    throw ValidationError("Q: feature dimension " + std::to_string(feature.size()) +
                          " does not match " + std::to_string(feature_dim));
  const Vector z = (feature - feature_center).cwiseQuotient(feature_scale);
  Vector v(static_cast<Eigen::Index>(n_actions));
  for (std::size_t a = 0; a < n_actions; ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    if (kind == QKind::linear) {
      v(ai) = linear(ai, 0) + linear.row(ai).tail(z.size()).dot(z);
    } else {
      v(ai) = nn_value(networks[a], activation, z, nullptr);
    }
  }
  return v;
}

double QApproximator::value(const Vector& feature, int action) const {
  if (action < 1 || static_cast<std::size_t>(action) > n_actions)
    throw ValidationError("Q: action out of range");
  return values(feature)(action - 1);
}

QApproximator fit_q_linear(const QData& data, const QConfig& cfg) {
  validate(data, cfg);
  QApproximator q = base(data, cfg, QKind::linear);
  const Matrix z = standardized(q, data.features);
  const Matrix zn = standardized(q, data.next_features);
  const Eigen::Index d = z.cols();
  q.linear = Matrix::Zero(static_cast<Eigen::Index>(q.n_actions), d + 1);
  const double mean_sq = 1.0 + z.rowwise().squaredNorm().mean();

  Vector x(d + 1), xn(d + 1);
  run_epochs(data, cfg, q, mean_sq, [&](std::size_t r, double alpha) {
    const auto ri = static_cast<Eigen::Index>(r);
    x(0) = 1.0;
    x.tail(d) = z.row(ri).transpose();
    xn(0) = 1.0;
    xn.tail(d) = zn.row(ri).transpose();
    const double target = data.utilities(ri) + cfg.gamma * (q.linear * xn).maxCoeff();
    const Eigen::Index a = data.actions[r] - 1;
    const double td = target - q.linear.row(a).dot(x);
    q.linear.row(a) += alpha * td * x.transpose();
  });
  return q;
}

QApproximator fit_q_nn(const QData& data, const QConfig& cfg) {
  validate(data, cfg);
  if (cfg.hidden == 0) throw ValidationError("Q-learning: hidden width must be >= 1");
  QApproximator q = base(data, cfg, QKind::neural);
  const Matrix z = standardized(q, data.features);
  const Matrix zn = standardized(q, data.next_features);
  Rng init = make_rng(cfg.seed, {stream::kInit});
  for (std::size_t a = 0; a < q.n_actions; ++a)
    q.networks.push_back({glorot_layer(q.feature_dim, cfg.hidden, init), glorot_layer(cfg.hidden, 1, init)});

  const Activation f = cfg.activation;
  Vector h, pre;
  run_epochs(data, cfg, q, 1.0 + static_cast<double>(cfg.hidden), [&](std::size_t r, double alpha) {
    const auto ri = static_cast<Eigen::Index>(r);
    const Vector xn = zn.row(ri).transpose();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& net : q.networks) best = std::max(best, nn_value(net, f, xn, nullptr));
    const double target = data.utilities(ri) + cfg.gamma * best;
    auto& net = q.networks[static_cast<std::size_t>(data.actions[r] - 1)];
    const Vector x = z.row(ri).transpose();
    const double td = target - nn_value(net, f, x, &h, &pre);
    Vector back = net[1].weight.row(0).transpose();
    for (Eigen::Index k = 0; k < h.size(); ++k) back(k) *= activate_derivative(f, pre(k), h(k));
    net[1].weight.row(0) += alpha * td * h.transpose();
    net[1].bias(0) += alpha * td;
    net[0].weight.noalias() += (alpha * td) * back * x.transpose();
    net[0].bias += (alpha * td) * back;
  });
  return q;
}

QApproximator fit_q(const QData& data, QKind kind, const QConfig& config) {
  return kind == QKind::neural ? fit_q_nn(data, config) : fit_q_linear(data, config);
}

int greedy_action(const QApproximator& q, const Vector& feature) {
  const Vector v = q.values(feature);
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < v.size(); ++a)
    if (v(a) > v(best)) best = a;
  return static_cast<int>(best) + 1;
}

PolicyValue evaluate_policy(const GenerativeModelSpec& spec, const Policy& policy,
                            std::size_t n_rollouts, std::size_t horizon, std::uint64_t seed,
                            ValueDefinition definition, double gamma) {
  if (n_rollouts == 0) throw ValidationError("evaluate: need at least one rollout");
  if (horizon == 0) throw ValidationError("evaluate: horizon must be >= 1");
  std::vector<double> outcome(n_rollouts);
  parallel_for(n_rollouts, [&](std::size_t r) {
    Rng rng = make_rng(seed, {stream::kRollout, r});
    Vector s = initial_state(spec, rng);
    double total = 0.0, discount = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const int a = policy(s, rng);
      StepOutcome step = simulate_step(spec, s, a, rng);
      total += definition == ValueDefinition::discounted ? discount * step.utility : step.utility;
      discount *= gamma;
      s = std::move(step.next_state);
    }
    outcome[r] = definition == ValueDefinition::discounted ? total : total / static_cast<double>(horizon);
  });
  PolicyValue v;
  v.n_rollouts = n_rollouts;
  v.horizon = horizon;
  v.definition = definition;
  v.gamma = gamma;
  v.seed = seed;
  v.mean_outcome = std::accumulate(outcome.begin(), outcome.end(), 0.0) / static_cast<double>(n_rollouts);
  if (n_rollouts > 1) {
    double ss = 0.0;
    for (double o : outcome) ss += (o - v.mean_outcome) * (o - v.mean_outcome);
    v.std_error = std::sqrt(ss / static_cast<double>(n_rollouts - 1) / static_cast<double>(n_rollouts));
  }
  return v;
}

PolicyValue evaluate_policy(const GenerativeModelSpec& spec, const FeatureMap& map,
                            const QApproximator& q, std::size_t n_rollouts, std::size_t horizon,
                            std::uint64_t seed, ValueDefinition definition) {
  if (map.input_dim() != spec.state_dim())
    throw ValidationError("evaluate: feature map input does not match the model state");
  if (map.output_dim() != q.feature_dim)
    throw ValidationError("evaluate: feature map output does not match the Q approximator");
  Policy greedy = [&](const Vector& s, Rng&) { return greedy_action(q, map.apply(s)); };
  return evaluate_policy(spec, greedy, n_rollouts, horizon, seed, definition, q.gamma);
}

Policy random_policy(std::size_t n_actions) {
  if (n_actions == 0) throw ValidationError("random policy: no actions");
  return [n_actions](const Vector&, Rng& rng) {
    std::uniform_int_distribution<int> pick(1, static_cast<int>(n_actions));
    return pick(rng);
  };
}

}  // namespace suffmdp
