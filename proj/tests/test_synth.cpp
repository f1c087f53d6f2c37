#include <gtest/gtest.h>

#include <random>

#include "lapgraph/synth.hpp"
#include "oracles.hpp"

using namespace lapgraph;

TEST(RandomComponentGraph, FourNodesTwoGroups) {
  const PlantedGraph g = random_k_component_graph(4, 2, {0.5, 1.5}, 1);
  EXPECT_EQ(g.k_true, 2);
  EXPECT_EQ(g.edge_support.size(), 2u);
  EXPECT_EQ(num_components(g.laplacian), 2);
  const Vector w = g.laplacian.weights().values();
  EXPECT_GT(w[pair_index(0, 1, 4)], 0.0);
  EXPECT_GT(w[pair_index(2, 3, 4)], 0.0);
}

TEST(RandomComponentGraph, NullityEqualsK) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlantedGraph g = random_k_component_graph(9, 3, {0.5, 1.5}, seed);
    EXPECT_EQ(num_components(g.laplacian), 3);
    EXPECT_EQ(g.labels.size(), 9u);
    for (const auto& [i, j] : g.edge_support) {
      EXPECT_EQ(g.labels[i], g.labels[j]);
      EXPECT_GE(g.laplacian.weights()(i, j), 0.5);
      EXPECT_LE(g.laplacian.weights()(i, j), 1.5);
    }
  }
}

TEST(RandomComponentGraph, Deterministic) {
  const PlantedGraph a = random_k_component_graph(12, 2, {0.5, 1.5}, 42);
  const PlantedGraph b = random_k_component_graph(12, 2, {0.5, 1.5}, 42);
  EXPECT_TRUE(a.laplacian.matrix() == b.laplacian.matrix());
  EXPECT_EQ(a.edge_support, b.edge_support);
}

TEST(RandomComponentGraph, Errors) {
  EXPECT_THROW(random_k_component_graph(5, 3, {0.5, 1.5}, 0), ValidationError);
  EXPECT_THROW(random_k_component_graph(6, 2, {0.0, 1.5}, 0), ValidationError);
  EXPECT_THROW(random_k_component_graph(6, 2, {2.0, 1.5}, 0), ValidationError);
  EXPECT_THROW(random_component_graph({3, 1}, {0.5, 1.5}, 0), ValidationError);
}

TEST(SampleGmrf, ZeroLaplacianGivesZeroSamples) {
  const ReturnsPanel X = sample_gmrf(LaplacianMatrix(GraphWeights::zeros(4)), 10, 3);
  EXPECT_EQ(X.returns, Matrix::Zero(10, 4));
}

TEST(SampleGmrf, ComponentSumsVanish) {
  const PlantedGraph g = random_k_component_graph(12, 3, {0.5, 1.5}, 4);
  const ReturnsPanel X = sample_gmrf(g.laplacian, 200, 5);
  for (Index t = 0; t < X.returns.rows(); ++t) {
    Vector sums = Vector::Zero(3);
    for (Index i = 0; i < 12; ++i) sums[g.labels[i]] += X.returns(t, i);
    EXPECT_LE(sums.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SampleGmrf, CovarianceApproachesPseudoinverse) {
  std::mt19937_64 rng(6);
  const LaplacianMatrix L = laplacian_from_dense(oracle::random_laplacian(5, 0.5, rng));
  const ReturnsPanel X = sample_gmrf(L, 100000, 7);
  const Matrix C = X.returns.transpose() * X.returns / static_cast<double>(X.returns.rows());
  const Matrix ref = oracle::pinv(L.matrix());
  EXPECT_LE((C - ref).norm() / ref.norm(), 0.05);
}

TEST(SampleGmrf, Deterministic) {
  const PlantedGraph g = random_k_component_graph(6, 1, {0.5, 1.5}, 8);
  EXPECT_TRUE(sample_gmrf(g.laplacian, 20, 9).returns == sample_gmrf(g.laplacian, 20, 9).returns);
  EXPECT_FALSE(sample_gmrf(g.laplacian, 20, 9).returns == sample_gmrf(g.laplacian, 20, 10).returns);
}

TEST(SampleGmrfWithLevels, ZeroScaleMatchesPlainSampler) {
  const PlantedGraph g = random_k_component_graph(8, 2, {0.5, 1.5}, 11);
  EXPECT_TRUE(sample_gmrf_with_levels(g.laplacian, 30, 12, 0.0).returns == sample_gmrf(g.laplacian, 30, 12).returns);
  EXPECT_THROW(sample_gmrf_with_levels(g.laplacian, 30, 12, -1.0), ValidationError);
}

TEST(SampleGmrfWithLevels, LevelsAreSharedWithinComponents) {
  const PlantedGraph g = random_k_component_graph(8, 2, {0.5, 1.5}, 13);
  const ReturnsPanel plain = sample_gmrf(g.laplacian, 30, 14);
  const ReturnsPanel shifted = sample_gmrf_with_levels(g.laplacian, 30, 14, 1.0);
  const Matrix diff = shifted.returns - plain.returns;
  for (Index t = 0; t < 30; ++t)
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        if (g.labels[i] == g.labels[j]) EXPECT_NEAR(diff(t, i), diff(t, j), 1e-15);
}

TEST(FactorMarket, UnitBetaNoResidualCopiesMarket) {
  FactorMarketSpec spec;
  spec.p = 3;
  spec.n = 20;
  spec.beta_lo = spec.beta_hi = 1.0;
  spec.residual_vol = 0.0;
  spec.regimes = {{20, 0.0}};
  const FactorMarket m = simulate_factor_market(spec);
  for (Index i = 0; i < 3; ++i) EXPECT_TRUE(m.returns.returns.col(i) == m.market);
}

TEST(FactorMarket, HighRegimeHasHigherResidualCorrelation) {
  FactorMarketSpec spec;
  spec.p = 10;
  spec.n = 1000;
  spec.regimes = {{500, 0.1}, {500, 0.7}};
  spec.seed = 15;
  const FactorMarket m = simulate_factor_market(spec);
  auto mean_corr = [&](Index first) {
    const ReturnsPanel part = m.returns.rows(first, 500);
    const Matrix resid = remove_market_factor(part, m.market.segment(first, 500)).residuals.returns;
    const Matrix C = correlation_from_covariance(sample_covariance(resid)).matrix();
    return (C.sum() - C.trace()) / (10.0 * 9.0);
  };
  EXPECT_GT(mean_corr(500), mean_corr(0) + 0.3);
  EXPECT_EQ(m.regime_starts, (std::vector<Index>{0, 500}));
}

TEST(FactorMarket, DeterministicAndValidated) {
  FactorMarketSpec spec;
  spec.n = 40;
  spec.regimes = {{20, 0.0}, {20, 0.5}};
  spec.seed = 16;
  EXPECT_TRUE(simulate_factor_market(spec).returns.returns == simulate_factor_market(spec).returns.returns);
  spec.n = 41;
  EXPECT_THROW(simulate_factor_market(spec), ValidationError);
  spec.n = 40;
  spec.regimes[1].residual_correlation = 1.0;
  EXPECT_THROW(simulate_factor_market(spec), ValidationError);
}

TEST(PricesFromReturns, RoundTripsThroughLogReturns) {
  FactorMarketSpec spec;
  spec.n = 15;
  spec.p = 3;
  spec.regimes = {{15, 0.2}};
  const ReturnsPanel X = simulate_factor_market(spec).returns;
  const PricePanel P = prices_from_returns(X);
  EXPECT_EQ(P.dates.size(), 16u);
  EXPECT_LT(P.dates[0], P.dates[1]);
  const ReturnsPanel back = log_returns(P);
  EXPECT_EQ(back.dates, X.dates);
  EXPECT_LE((back.returns - X.returns).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ScoreRecovery, Examples) {
  const PlantedGraph g = random_k_component_graph(10, 2, {0.5, 1.5}, 17);
  const RecoveryScore exact = score_recovery(g.laplacian, g);
  EXPECT_EQ(exact.f_score, 1.0);
  EXPECT_EQ(exact.relative_error, 0.0);
  const RecoveryScore zero = score_recovery(LaplacianMatrix(GraphWeights::zeros(10)), g);
  EXPECT_EQ(zero.recall, 0.0);
  EXPECT_EQ(zero.f_score, 0.0);
  EXPECT_THROW(score_recovery(LaplacianMatrix(GraphWeights::zeros(9)), g), ValidationError);
}

TEST(ScoreRecovery, MatchesConfusionCount) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PlantedGraph g = random_k_component_graph(12, 3, {0.5, 1.5}, 19);
  for (int rep = 0; rep < 10; ++rep) {
    Vector w(num_pairs(12));
    for (Index m = 0; m < w.size(); ++m) w[m] = u(rng) < 0.4 ? u(rng) : 0.0;
    const LaplacianMatrix est(GraphWeights(12, w));
    const double cut = 1e-4 * w.maxCoeff();
    int tp = 0, fp = 0, fn = 0;
    for (Index i = 0; i < 12; ++i)
      for (Index j = i + 1; j < 12; ++j) {
        const bool pred = est(i, j) < -cut;
        const bool act = g.laplacian(i, j) < 0.0;
        tp += pred && act;
        fp += pred && !act;
        fn += !pred && act;
      }
    const RecoveryScore s = score_recovery(est, g);
    EXPECT_EQ(s.true_positives, tp);
    EXPECT_EQ(s.false_positives, fp);
    EXPECT_EQ(s.false_negatives, fn);
    const double precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = static_cast<double>(tp) / (tp + fn);
    EXPECT_DOUBLE_EQ(s.precision, precision);
    EXPECT_DOUBLE_EQ(s.recall, recall);
    if (precision + recall > 0.0) EXPECT_NEAR(s.f_score, 2 * precision * recall / (precision + recall), 1e-15);
    const double rel = (est.matrix() - g.laplacian.matrix()).norm() / g.laplacian.matrix().norm();
    EXPECT_NEAR(s.relative_error, rel, 1e-14);
  }
}
