#pragma once

// Planted-truth fixtures: random k-component Laplacians, improper GMRF
// sampling, a one-factor market simulator with correlation regimes, and
// support-recovery scoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lapgraph/dates.hpp"
#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/preprocess.hpp"

namespace lapgraph {

struct WeightRange {
  double lo = 0.5;
  double hi = 1.5;
};

struct PlantedGraph {
  LaplacianMatrix laplacian;
  int k_true = 1;
  std::vector<std::pair<Index, Index>> edge_support;
  std::vector<int> labels;  // component of every node
};

inline std::vector<std::string> synthetic_tickers(Index p) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(p));
  char buf[32];
  for (Index i = 0; i < p; ++i) {
    std::snprintf(buf, sizeof buf, "S%03ld", static_cast<long>(i));
    out.emplace_back(buf);
  }
  return out;
}

/// Nodes are split into consecutive groups of the given sizes. Each group gets
/// a random spanning tree plus every other intra-group pair with probability
/// `extra_edge_prob`; weights are uniform on the range.
inline PlantedGraph random_component_graph(const std::vector<Index>& sizes, WeightRange range, std::uint64_t seed,
                                           double extra_edge_prob = 0.3) {
  if (sizes.empty()) throw ValidationError("random_component_graph: no components");
  if (!(range.lo > 0.0) || !(range.hi >= range.lo))
    throw ValidationError("random_component_graph: weight range must be a positive interval");
  if (extra_edge_prob < 0.0 || extra_edge_prob > 1.0)
    throw ValidationError("random_component_graph: edge probability outside [0, 1]");
  for (Index s : sizes)
    if (s < 2) throw ValidationError("random_component_graph: every component needs at least 2 nodes");
  const Index p = std::accumulate(sizes.begin(), sizes.end(), Index{0});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(range.lo, range.hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  Vector w = Vector::Zero(num_pairs(p));
  std::vector<int> labels(static_cast<std::size_t>(p));
  Index first = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const Index size = sizes[c];
    std::vector<Index> nodes(static_cast<std::size_t>(size));
    std::iota(nodes.begin(), nodes.end(), first);
    for (Index v : nodes) labels[v] = static_cast<int>(c);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    Matrix adj = Matrix::Zero(size, size);
    for (Index t = 1; t < size; ++t) {
      std::uniform_int_distribution<Index> parent(0, t - 1);
      const Index u = parent(rng);
      adj(t, u) = adj(u, t) = 1.0;
    }
    for (Index a = 0; a < size; ++a)
      for (Index b = a + 1; b < size; ++b) {
        const bool extra = coin(rng) < extra_edge_prob;
        if (adj(a, b) == 0.0 && extra) adj(a, b) = adj(b, a) = 1.0;
      }
    for (Index a = 0; a < size; ++a)
      for (Index b = a + 1; b < size; ++b) {
        const double v = weight(rng);
        if (adj(a, b) == 0.0) continue;
        Index i = nodes[a];
        Index j = nodes[b];
        if (i > j) std::swap(i, j);
        w[pair_index(i, j, p)] = v;
      }
    first += size;
  }

  PlantedGraph g{LaplacianMatrix(GraphWeights(p, w)), static_cast<int>(sizes.size()), {}, std::move(labels)};
  for (Index m = 0; m < w.size(); ++m)
    if (w[m] > 0.0) g.edge_support.push_back(pair_nodes(m, p));
  return g;
}

/// Balanced partition of p nodes into k connected random groups.
inline PlantedGraph random_k_component_graph(Index p, int k, WeightRange range, std::uint64_t seed,
                                             double extra_edge_prob = 0.3) {
  if (k < 1) throw ValidationError("random_k_component_graph: k must be at least 1");
  if (2 * static_cast<Index>(k) > p)
    throw ValidationError("random_k_component_graph: k=" + std::to_string(k) + " exceeds p/2 for p=" +
                          std::to_string(p));
  std::vector<Index> sizes(static_cast<std::size_t>(k), p / k);
  for (Index r = 0; r < p % k; ++r) ++sizes[r];
  return random_component_graph(sizes, range, seed, extra_edge_prob);
}

/// n i.i.d. draws of N(0, L^+): x = U diag(g) U^T z with g = lambda^-1/2 above
/// the zero tolerance and 0 on the nullspace.
inline ReturnsPanel sample_gmrf(const LaplacianMatrix& L, Index n, std::uint64_t seed,
                                const std::string& start_date = "2019-01-01") {
  if (n < 1) throw ValidationError("sample_gmrf: n must be at least 1");
  const Index p = L.nodes();
  const EigenDecomposition eig = symmetric_eigen(L.matrix());
  const double tol = default_zero_tol(eig.eigenvalues);
  Vector g(p);
  for (Index i = 0; i < p; ++i) g[i] = eig.eigenvalues[i] > tol ? 1.0 / std::sqrt(eig.eigenvalues[i]) : 0.0;
  const Matrix A = eig.eigenvectors * g.asDiagonal() * eig.eigenvectors.transpose();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(n, p);
  for (Index t = 0; t < n; ++t)
    for (Index i = 0; i < p; ++i) Z(t, i) = normal(rng);

  ReturnsPanel out;
  out.returns = Z * A;  // A is symmetric
  out.dates = business_days(start_date, static_cast<std::size_t>(n));
  out.tickers = synthetic_tickers(p);
  return out;
}

/// sample_gmrf plus an independent N(0, (level_scale * s)^2) level per
/// component and row, where s^2 is the mean marginal variance of the plain
/// draws. The density of the improper model is flat along these directions,
/// so the planted Laplacian is unchanged.
inline ReturnsPanel sample_gmrf_with_levels(const LaplacianMatrix& L, Index n, std::uint64_t seed,
                                            double level_scale, const std::string& start_date = "2019-01-01") {
  if (!(level_scale >= 0.0) || !std::isfinite(level_scale))
    throw ValidationError("sample_gmrf_with_levels: level_scale must be finite and nonnegative");
  ReturnsPanel out = sample_gmrf(L, n, seed, start_date);
  const Index p = L.nodes();
  const Matrix pinv = [&] {
    const EigenDecomposition eig = symmetric_eigen(L.matrix());
    const double tol = default_zero_tol(eig.eigenvalues);
    Vector inv(p);
    for (Index i = 0; i < p; ++i) inv[i] = eig.eigenvalues[i] > tol ? 1.0 / eig.eigenvalues[i] : 0.0;
    return Matrix(eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose());
  }();
  const double s = std::sqrt(std::max(0.0, pinv.diagonal().mean()));
  const std::vector<int> label = component_labels(L.weights(), 0.0);
  const int k = p ? *std::max_element(label.begin(), label.end()) + 1 : 0;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6c65u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector level(k);
  for (Index t = 0; t < n; ++t) {
    for (int c = 0; c < k; ++c) level[c] = level_scale * s * normal(rng);
    for (Index i = 0; i < p; ++i) out.returns(t, i) += level[label[i]];
  }
  return out;
}

struct Regime {
  Index length = 0;
  double residual_correlation = 0.0;  // equicorrelation of the residuals in [0, 1)
};

struct FactorMarketSpec {
  Index p = 10;
  Index n = 0;  // must equal the total regime length
  double beta_lo = 0.8;
  double beta_hi = 1.2;
  double market_vol = 0.01;
  double residual_vol = 0.01;
  std::vector<Regime> regimes;
  std::uint64_t seed = 0;
  std::string start_date = "2019-01-01";
};

struct FactorMarket {
  ReturnsPanel returns;
  Vector market;
  Vector betas;
  std::vector<Index> regime_starts;  // first row of every regime
};

/// x_t = beta * m_t + eps_t, with eps equicorrelated inside each regime.
inline FactorMarket simulate_factor_market(const FactorMarketSpec& spec) {
  if (spec.p < 1) throw ValidationError("simulate_factor_market: p must be positive");
  if (spec.regimes.empty()) throw ValidationError("simulate_factor_market: at least one regime is required");
  if (!(spec.beta_hi >= spec.beta_lo)) throw ValidationError("simulate_factor_market: empty beta range");
  if (spec.market_vol < 0.0 || spec.residual_vol < 0.0)
    throw ValidationError("simulate_factor_market: volatilities must be nonnegative");
  Index total = 0;
  for (const Regime& r : spec.regimes) {
    if (r.length < 1) throw ValidationError("simulate_factor_market: regime lengths must be positive");
    if (r.residual_correlation < 0.0 || r.residual_correlation >= 1.0)
      throw ValidationError("simulate_factor_market: residual correlation must lie in [0, 1)");
    total += r.length;
  }
  if (spec.n != total)
    throw ValidationError("simulate_factor_market: n=" + std::to_string(spec.n) + " but regimes cover " +
                          std::to_string(total) + " rows");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> beta_draw(spec.beta_lo, spec.beta_hi);

  FactorMarket out;
  out.betas.resize(spec.p);
  for (Index i = 0; i < spec.p; ++i) out.betas[i] = spec.beta_lo == spec.beta_hi ? spec.beta_lo : beta_draw(rng);
  out.market.resize(spec.n);
  out.returns.returns.resize(spec.n, spec.p);
  Index t = 0;
  for (const Regime& r : spec.regimes) {
    out.regime_starts.push_back(t);
    const double common = std::sqrt(r.residual_correlation);
    const double own = std::sqrt(1.0 - r.residual_correlation);
    for (Index s = 0; s < r.length; ++s, ++t) {
      const double m = spec.market_vol * normal(rng);
      const double f = normal(rng);
      out.market[t] = m;
      for (Index i = 0; i < spec.p; ++i) {
        const double eps = spec.residual_vol * (common * f + own * normal(rng));
        out.returns.returns(t, i) = out.betas[i] * m + eps;
      }
    }
  }
  out.returns.dates = business_days(spec.start_date, static_cast<std::size_t>(spec.n));
  out.returns.tickers = synthetic_tickers(spec.p);
  return out;
}

/// Prices 100 * exp(cumulative returns), with a starting row dated on the
/// weekday before the first return.
inline PricePanel prices_from_returns(const ReturnsPanel& X) {
  validate_panel_shape(X.dates, X.tickers, X.returns, "prices_from_returns");
  if (X.dates.empty()) throw ValidationError("prices_from_returns: empty panel");
  PricePanel out;
  out.tickers = X.tickers;
  const Index n = X.returns.rows();
  out.prices.resize(n + 1, X.returns.cols());
  out.prices.row(0).setConstant(100.0);
  Vector level = Vector::Constant(X.returns.cols(), std::log(100.0));
  for (Index t = 0; t < n; ++t) {
    level += X.returns.row(t).transpose();
    out.prices.row(t + 1) = level.array().exp().matrix().transpose();
  }
  out.dates.push_back(previous_business_day(X.dates.front()));
  out.dates.insert(out.dates.end(), X.dates.begin(), X.dates.end());
  return out;
}

struct RecoveryScore {
  double f_score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double relative_error = 0.0;
  Index true_positives = 0;
  Index false_positives = 0;
  Index false_negatives = 0;
};

/// An estimated edge counts when its weight exceeds relative_threshold times
/// the largest estimated weight.
inline RecoveryScore score_recovery(const LaplacianMatrix& estimate, const PlantedGraph& planted,
                                    double relative_threshold = 1e-4) {
  const Index p = planted.laplacian.nodes();
  if (estimate.nodes() != p)
    throw ValidationError("score_recovery: estimate has p=" + std::to_string(estimate.nodes()) +
                          ", planted graph has p=" + std::to_string(p));
  const Vector w = estimate.weights().values();
  const Vector truth = planted.laplacian.weights().values();
  if (!(relative_threshold >= 0.0))
    throw ValidationError("score_recovery: relative_threshold must be nonnegative");
  const double cut = w.size() && w.maxCoeff() > 0.0 ? relative_threshold * w.maxCoeff() : 0.0;
  RecoveryScore s;
  for (Index m = 0; m < w.size(); ++m) {
    const bool predicted = w[m] > cut && w[m] > 0.0;
    const bool actual = truth[m] > 0.0;
    s.true_positives += predicted && actual;
    s.false_positives += predicted && !actual;
    s.false_negatives += !predicted && actual;
  }
  const Index predicted = s.true_positives + s.false_positives;
  const Index actual = s.true_positives + s.false_negatives;
  s.precision = predicted ? static_cast<double>(s.true_positives) / static_cast<double>(predicted) : 0.0;
  s.recall = actual ? static_cast<double>(s.true_positives) / static_cast<double>(actual) : 0.0;
  s.f_score = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  const double ref = planted.laplacian.matrix().norm();
  s.relative_error = ref > 0.0 ? (estimate.matrix() - planted.laplacian.matrix()).norm() / ref : 0.0;
  return s;
}

}  // namespace lapgraph
