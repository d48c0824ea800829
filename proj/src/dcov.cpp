#include "suffmdp/dcov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "suffmdp/error.hpp"
#include "suffmdp/parallel.hpp"
#include "suffmdp/rng.hpp"

namespace suffmdp {
namespace {

void check_pair(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw ValidationError("dcov: x and y must have the same number of rows");
  if (x.rows() < 2) throw ValidationError("dcov: need at least 2 observations");
  if (x.cols() == 0 || y.cols() == 0) throw ValidationError("dcov: empty feature dimension");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("dcov: non-finite entries");
}

// Ties within this relative margin count as "at least as large", so the
// identity permutation and exact symmetries are not lost to rounding.
constexpr double kTieTolerance = 1e-12;

double permuted_statistic(const Matrix& a, const Matrix& b, std::span<const Eigen::Index> perm) {
  const Eigen::Index m = a.rows();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index pk = perm[static_cast<std::size_t>(k)];
    const double* acol = a.col(k).data();
    const double* bcol = b.col(pk).data();
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += acol[j] * bcol[perm[static_cast<std::size_t>(j)]];
    sum += s;
  }
  return sum / static_cast<double>(m * m);
}

}  // namespace

Matrix double_centered_distances(const Matrix& x) {
  const Eigen::Index m = x.rows();
  Matrix d(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    d(k, k) = 0.0;
    for (Eigen::Index j = k + 1; j < m; ++j) {
      const double v = (x.row(j) - x.row(k)).norm();
      d(j, k) = v;
      d(k, j) = v;
    }
  }
  const Vector row_mean = d.rowwise().mean();
  const double grand = row_mean.mean();
  // d is symmetric, so column means equal row means.
  d.colwise() -= row_mean;
  d.rowwise() -= row_mean.transpose();
  d.array() += grand;
  return d;
}

double dcov_statistic(const Matrix& x, const Matrix& y) {
  check_pair(x, y);
  const Matrix a = double_centered_distances(x);
  const Matrix b = double_centered_distances(y);
  const double m = static_cast<double>(x.rows());
  return std::max(0.0, a.cwiseProduct(b).sum() / (m * m));
}

TestReport dcov_permutation_pvalue(const Matrix& x, const Matrix& y, std::size_t permutations,
                                   std::uint64_t seed) {
  check_pair(x, y);
  if (permutations == 0) throw ValidationError("dcov: need at least one permutation");
  const Matrix a = double_centered_distances(x);
  const Matrix b = double_centered_distances(y);
  const Eigen::Index m = x.rows();
  const double observed = a.cwiseProduct(b).sum() / static_cast<double>(m * m);
  const double threshold = observed - kTieTolerance * std::abs(observed);

  Rng rng = make_rng(seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::size_t exceed = 0;
  for (std::size_t b_idx = 0; b_idx < permutations; ++b_idx) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    if (permuted_statistic(a, b, perm) >= threshold) ++exceed;
  }

  TestReport report;
  report.method = "dcov-permutation";
  report.statistic = std::max(0.0, observed);
  report.p_value = static_cast<double>(1 + exceed) / static_cast<double>(permutations + 1);
  report.n_permutations = permutations;
  report.seed = seed;
  return report;
}

TestReport lrt_contingency_pvalue(const Matrix& counts) {
  if ((counts.array() < 0).any() || !counts.allFinite())
    throw ValidationError("lrt: counts must be finite and nonnegative");
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index r = 0; r < counts.rows(); ++r)
    if (counts.row(r).sum() > 0) rows.push_back(r);
  for (Eigen::Index c = 0; c < counts.cols(); ++c)
    if (counts.col(c).sum() > 0) cols.push_back(c);

  TestReport report;
  report.method = "lrt";
  if (rows.size() < 2 || cols.size() < 2) {
    report.statistic = 0.0;
    report.p_value = 1.0;
    report.degenerate = true;
    return report;
  }
  Matrix o(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      o(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = counts(rows[r], cols[c]);
  const Vector row_sum = o.rowwise().sum();
  const Vector col_sum = o.colwise().sum().transpose();
  const double total = o.sum();
  double g = 0.0;
  for (Eigen::Index r = 0; r < o.rows(); ++r)
    for (Eigen::Index c = 0; c < o.cols(); ++c) {
      const double obs = o(r, c);
      if (obs > 0) g += obs * std::log(obs * total / (row_sum(r) * col_sum(c)));
    }
  g = std::max(0.0, 2.0 * g);
  const double df = static_cast<double>((o.rows() - 1) * (o.cols() - 1));
  const boost::math::chi_squared dist(df);
  report.statistic = g;
  report.degrees_of_freedom = df;
  report.p_value = g == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, g));
  return report;
}

TestReport lrt_independence_pvalue(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.rows() == 0) throw ValidationError("lrt: mismatched inputs");
  auto levels = [](const Matrix& m) {
    std::map<std::vector<double>, Eigen::Index> index;
    std::vector<Eigen::Index> code(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> key(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) key[static_cast<std::size_t>(c)] = m(r, c);
      auto [it, _] = index.try_emplace(key, static_cast<Eigen::Index>(index.size()));
      code[static_cast<std::size_t>(r)] = it->second;
    }
    return std::pair{code, static_cast<Eigen::Index>(index.size())};
  };
  const auto [xc, nx] = levels(x);
  const auto [yc, ny] = levels(y);
  Matrix counts = Matrix::Zero(nx, ny);
  for (std::size_t r = 0; r < xc.size(); ++r) counts(xc[r], yc[r]) += 1.0;
  return lrt_contingency_pvalue(counts);
}

double pooled_pvalue(std::span<const double> p_values, std::size_t u) {
  if (p_values.empty()) throw ValidationError("pooled_pvalue: empty p-value list");
  if (u < 1 || u > p_values.size()) throw ValidationError("pooled_pvalue: u must lie in [1, T]");
  std::vector<double> sorted(p_values.begin(), p_values.end());
  for (double p : sorted)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("pooled_pvalue: p-values must lie in [0, 1]");
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(u - 1), sorted.end());
  const double order_stat = sorted[u - 1];
  return std::min(1.0, static_cast<double>(p_values.size()) * order_stat / static_cast<double>(u));
}

TestReport stratified_pooled_test(const StratifiedSample& sample,
                                  const StratifiedTestConfig& config, std::uint64_t seed) {
  const std::size_t N = sample.times.size();
  if (sample.actions.size() != N || static_cast<std::size_t>(sample.g.rows()) != N ||
      static_cast<std::size_t>(sample.h.rows()) != N)
    throw ValidationError("stratified test: features, times and actions disagree in length");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw ValidationError("stratified test: level must lie in (0, 1)");
  if (config.min_stratum < 2) throw ValidationError("stratified test: min_stratum must be >= 2");

  std::map<std::pair<std::size_t, int>, std::vector<Eigen::Index>> strata;
  for (std::size_t r = 0; r < N; ++r)
    strata[{sample.times[r], sample.actions[r]}].push_back(static_cast<Eigen::Index>(r));

  std::vector<std::pair<std::size_t, int>> keys;
  std::vector<const std::vector<Eigen::Index>*> members;
  for (const auto& [key, rows] : strata)
    if (rows.size() >= config.min_stratum) {
      keys.push_back(key);
      members.push_back(&rows);
    }
  if (keys.empty()) throw ValidationError("insufficient per-stratum data");

  std::vector<StratumResult> results(keys.size());
  parallel_for(keys.size(), [&](std::size_t k) {
    const auto& rows = *members[k];
    const auto m = static_cast<Eigen::Index>(rows.size());
    Matrix g(m, sample.g.cols()), h(m, sample.h.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
      g.row(r) = sample.g.row(rows[static_cast<std::size_t>(r)]);
      h.row(r) = sample.h.row(rows[static_cast<std::size_t>(r)]);
    }
    const auto [t, a] = keys[k];
    const std::uint64_t stratum_seed =
        derive_seed(seed, {stream::kStratum, t, static_cast<std::uint64_t>(a)});
    const TestReport one = dcov_permutation_pvalue(g, h, config.permutations, stratum_seed);
    results[k] = StratumResult{t, a, rows.size(), *one.statistic, one.p_value};
  });

  TestReport report;
  report.method = "stratified-dcov";
  report.n_permutations = config.permutations;
  report.seed = seed;
  report.level = config.level;
  report.strata = results;

  // Bonferroni over the tested actions of each time point.
  std::map<std::size_t, std::pair<double, std::size_t>> per_time;  // t -> (min p, count)
  for (const auto& s : results) {
    auto [it, inserted] = per_time.try_emplace(s.time, s.p_value, 0);
    it->second.first = std::min(it->second.first, s.p_value);
    ++it->second.second;
  }
  for (const auto& [t, v] : per_time) {
    report.tested_times.push_back(t);
    report.time_p_values.push_back(std::min(1.0, static_cast<double>(v.second) * v.first));
  }
  const std::size_t T = report.time_p_values.size();
  report.pooled_u = std::min(config.pool_order.value_or(default_pool_order(T)), T);
  report.p_value = pooled_pvalue(report.time_p_values, report.pooled_u);
  report.reject = report.p_value <= config.level;
  return report;
}

TestReport stratified_pooled_test(const TrajectoryDataset& ds, const StepFeature& g,
                                  const StepFeature& h, const StratifiedTestConfig& config,
                                  std::uint64_t seed) {
  const std::size_t N = ds.n_subjects() * ds.horizon();
  StratifiedSample sample;
  sample.times.reserve(N);
  sample.actions.reserve(N);
  std::size_t r = 0;
  for (std::size_t i = 0; i < ds.n_subjects(); ++i)
    for (std::size_t t = 1; t <= ds.horizon(); ++t, ++r) {
      const Vector gv = g(ds, i, t);
      const Vector hv = h(ds, i, t);
      if (r == 0) {
        sample.g.resize(static_cast<Eigen::Index>(N), gv.size());
        sample.h.resize(static_cast<Eigen::Index>(N), hv.size());
      }
      if (gv.size() != sample.g.cols() || hv.size() != sample.h.cols())
        throw ValidationError("stratified test: feature extractor changed dimension");
      sample.g.row(static_cast<Eigen::Index>(r)) = gv.transpose();
      sample.h.row(static_cast<Eigen::Index>(r)) = hv.transpose();
      sample.times.push_back(t);
      sample.actions.push_back(ds.action(i, t));
    }
  return stratified_pooled_test(sample, config, seed);
}

}  // namespace suffmdp
