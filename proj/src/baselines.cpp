#include "suffmdp/baselines.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {

PcaResult pca_feature_map(const TrajectoryDataset& ds, double var_explained) {
  if (!(var_explained > 0.0 && var_explained <= 1.0))
    throw ValidationError("pca: variance fraction must lie in (0, 1]");
  const std::size_t n = ds.n_subjects(), T = ds.horizon(), p = ds.state_dim();
  if (n * T < 2) throw ValidationError("pca: need at least two state observations");

  Matrix cov = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(p));
  Matrix block(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i)
      block.row(static_cast<Eigen::Index>(i)) = ds.states(i).row(static_cast<Eigen::Index>(t));
    const Vector mt = block.colwise().mean().transpose();
    mean += mt;
    const Matrix centered = block.rowwise() - mt.transpose();
    cov.noalias() += centered.transpose() * centered / static_cast<double>(n);
  }
  cov /= static_cast<double>(T);
  mean /= static_cast<double>(T);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double total = values.sum();
  if (!(total > 0.0)) throw ValidationError("pca: zero covariance");

  std::size_t k = 0;
  double acc = 0.0;
  while (k < p) {
    acc += values(static_cast<Eigen::Index>(k));
    ++k;
    if (acc >= var_explained * total * (1.0 - 1e-12)) break;
  }

  PcaResult out;
  out.n_components = k;
  out.eigenvalues = values;
  out.mean = mean;
  out.components = vectors.leftCols(static_cast<Eigen::Index>(k)).transpose();
  out.map = FeatureMap(p, {LinearComponent{mean, out.components}});
  return out;
}

TnnResult fit_tnn(const TrajectoryDataset& ds, const SelectionConfig& config, std::uint64_t seed,
                  double column_tolerance) {
  const TransitionTable table = make_transition_table(ds);
  const std::size_t K = ds.n_actions();
  std::vector<TnnActionFit> fits(K);
  parallel_for(K, [&](std::size_t k) {
    const int a = static_cast<int>(k + 1);
    const TransitionTable sub = filter_action(table, a);
    DimensionSelection sel =
        select_feature_dimension(sub, config, derive_seed(seed, {stream::kTnn, k + 1}));
    TnnActionFit& fit = fits[k];
    fit.action = a;
    fit.feature_dim = sel.feature_dim;
    fit.sufficient = sel.sufficient;
    fit.variables = active_inputs(sel.model, column_tolerance);
    fit.model = std::move(sel.model);
  });

  TnnResult out;
  std::set<std::size_t> vars;
  std::vector<FeatureMap::Component> comps;
  for (auto& fit : fits) {
    vars.insert(fit.variables.begin(), fit.variables.end());
    out.feature_dim += fit.feature_dim;
    const FeatureMap m = fit.model.feature_map({}, ds.state_dim());
    comps.insert(comps.end(), m.components().begin(), m.components().end());
  }
  out.variables.assign(vars.begin(), vars.end());
  out.map = FeatureMap(ds.state_dim(), std::move(comps));
  out.actions = std::move(fits);
  return out;
}

}  // namespace suffmdp
