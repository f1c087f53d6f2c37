#pragma once

// Price panels to solver inputs: log-returns, covariance / correlation,
// market-factor residuals and squared-distance matrices.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"

namespace lapgraph {

struct PricePanel {
  std::vector<std::string> dates;    // strictly increasing ISO-8601
  std::vector<std::string> tickers;
  Matrix prices;                     // rows = dates, cols = tickers
};

struct ReturnsPanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Matrix returns;  // n x p

  Index observations() const { return returns.rows(); }
  Index assets() const { return returns.cols(); }

  /// Rows [first, first + count).
  ReturnsPanel rows(Index first, Index count) const {
    ReturnsPanel out;
    out.dates.assign(dates.begin() + first, dates.begin() + first + count);
    out.tickers = tickers;
    out.returns = returns.middleRows(first, count);
    return out;
  }
};

inline void validate_panel_shape(const std::vector<std::string>& dates, const std::vector<std::string>& tickers,
                                 const Matrix& values, const char* who) {
  if (static_cast<Index>(dates.size()) != values.rows() || static_cast<Index>(tickers.size()) != values.cols())
    throw ValidationError(std::string(who) + ": labels do not match the data shape");
}

enum class SimilarityKind { covariance, correlation };

inline const char* to_string(SimilarityKind k) {
  return k == SimilarityKind::covariance ? "covariance" : "correlation";
}

class SimilarityMatrix {
 public:
  SimilarityMatrix(Matrix entries, SimilarityKind kind) : S_(std::move(entries)), kind_(kind) {
    if (S_.rows() != S_.cols() || S_.rows() < 1)
      throw ValidationError("SimilarityMatrix: expected a non-empty square matrix");
    if (!S_.allFinite()) throw ValidationError("SimilarityMatrix: non-finite entries");
    const double scale = std::max(1.0, S_.cwiseAbs().maxCoeff());
    if ((S_ - S_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ValidationError("SimilarityMatrix: not symmetric");
    if (kind_ == SimilarityKind::correlation) {
      if ((S_.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
        throw ValidationError("SimilarityMatrix: correlation matrix without unit diagonal");
      if (S_.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw ValidationError("SimilarityMatrix: correlation entry outside [-1, 1]");
    }
  }

  const Matrix& matrix() const { return S_; }
  SimilarityKind kind() const { return kind_; }
  Index size() const { return S_.rows(); }

 private:
  Matrix S_;
  SimilarityKind kind_;
};

inline ReturnsPanel log_returns(const PricePanel& panel) {
  validate_panel_shape(panel.dates, panel.tickers, panel.prices, "log_returns");
  if (panel.prices.rows() < 2) throw ValidationError("log_returns: need at least two price rows");
  for (Index t = 0; t < panel.prices.rows(); ++t)
    for (Index i = 0; i < panel.prices.cols(); ++i)
      if (!(panel.prices(t, i) > 0.0) || !std::isfinite(panel.prices(t, i)))
        throw ValidationError("log_returns: non-positive price for " + panel.tickers[i] + " on " +
                              panel.dates[t]);
  ReturnsPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.tickers = panel.tickers;
  const Matrix logp = panel.prices.array().log().matrix();
  out.returns = logp.bottomRows(logp.rows() - 1) - logp.topRows(logp.rows() - 1);
  return out;
}

inline SimilarityMatrix sample_covariance(const Matrix& X) {
  if (X.rows() < 2) throw ValidationError("sample_covariance: need at least two observations");
  const Matrix centered = X.rowwise() - X.colwise().mean();
  Matrix S = (centered.transpose() * centered) / static_cast<double>(X.rows() - 1);
  S = 0.5 * (S + S.transpose()).eval();
  return {std::move(S), SimilarityKind::covariance};
}

inline SimilarityMatrix sample_covariance(const ReturnsPanel& X) { return sample_covariance(X.returns); }

/// Diag(S)^-1/2 S Diag(S)^-1/2. `tickers` (optional) names a zero-variance
/// asset in the error message.
inline SimilarityMatrix correlation_from_covariance(const SimilarityMatrix& S,
                                                    const std::vector<std::string>& tickers = {}) {
  if (S.kind() != SimilarityKind::covariance)
    throw ValidationError("correlation_from_covariance: input is already a correlation matrix");
  const Matrix& C = S.matrix();
  const Index p = C.rows();
  Vector inv_sd(p);
  for (Index i = 0; i < p; ++i) {
    if (!(C(i, i) > 0.0)) {
      const std::string name = i < static_cast<Index>(tickers.size()) ? tickers[i] : "#" + std::to_string(i);
      throw ValidationError("correlation_from_covariance: asset " + name + " has zero variance");
    }
    inv_sd[i] = 1.0 / std::sqrt(C(i, i));
  }
  Matrix R = inv_sd.asDiagonal() * C * inv_sd.asDiagonal();
  for (Index i = 0; i < p; ++i) {
    R(i, i) = 1.0;
    for (Index j = i + 1; j < p; ++j) {
      const double v = std::clamp(0.5 * (R(i, j) + R(j, i)), -1.0, 1.0);
      R(i, j) = R(j, i) = v;
    }
  }
  return {std::move(R), SimilarityKind::correlation};
}

/// Per-window similarity in the requested kind.
inline SimilarityMatrix similarity(const ReturnsPanel& X, SimilarityKind kind) {
  SimilarityMatrix cov = sample_covariance(X);
  if (kind == SimilarityKind::covariance) return cov;
  return correlation_from_covariance(cov, X.tickers);
}

struct FactorResiduals {
  ReturnsPanel residuals;
  Vector betas;       // per-asset market loading
  Vector intercepts;  // zero when fitted without intercept
};

/// Per-asset least squares of each return column on the market series.
inline FactorResiduals remove_market_factor(const ReturnsPanel& X, const Vector& market, bool intercept = true) {
  validate_panel_shape(X.dates, X.tickers, X.returns, "remove_market_factor");
  const Index n = X.returns.rows();
  if (market.size() != n)
    throw ValidationError("remove_market_factor: market series has " + std::to_string(market.size()) +
                          " entries, panel has " + std::to_string(n) + " rows");
  const double m_mean = intercept ? market.mean() : 0.0;
  const Vector mc = market.array() - m_mean;
  const double ss = mc.squaredNorm();
  if (!(ss > 0.0)) throw ValidationError("remove_market_factor: market series has zero variance");

  FactorResiduals out;
  out.residuals.dates = X.dates;
  out.residuals.tickers = X.tickers;
  out.residuals.returns.resize(n, X.returns.cols());
  out.betas.resize(X.returns.cols());
  out.intercepts = Vector::Zero(X.returns.cols());
  for (Index i = 0; i < X.returns.cols(); ++i) {
    const double x_mean = intercept ? X.returns.col(i).mean() : 0.0;
    const Vector xc = X.returns.col(i).array() - x_mean;
    const double beta = mc.dot(xc) / ss;
    out.betas[i] = beta;
    out.intercepts[i] = x_mean - beta * m_mean;
    out.residuals.returns.col(i) = xc - beta * mc;
  }
  return out;
}

/// Equal-weight cross-sectional mean return, the default market proxy.
inline Vector cross_sectional_mean(const ReturnsPanel& X) { return X.returns.rowwise().mean(); }

/// Z_ij = || x_i - x_j ||^2 over the columns of X.
inline Matrix distance_matrix(const Matrix& X) {
  const Index p = X.cols();
  Matrix Z = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) Z(i, j) = Z(j, i) = (X.col(i) - X.col(j)).squaredNorm();
  return Z;
}

inline Matrix distance_matrix(const ReturnsPanel& X) { return distance_matrix(X.returns); }

/// Demeans each column and scales it to unit sample standard deviation.
inline ReturnsPanel normalize_columns(const ReturnsPanel& X) {
  if (X.returns.rows() < 2) throw ValidationError("normalize_columns: need at least two observations");
  ReturnsPanel out = X;
  const double denom = static_cast<double>(X.returns.rows() - 1);
  for (Index i = 0; i < X.returns.cols(); ++i) {
    const Vector c = X.returns.col(i).array() - X.returns.col(i).mean();
    const double sd = std::sqrt(c.squaredNorm() / denom);
    if (!(sd > 0.0))
      throw ValidationError("normalize_columns: column " +
                            (i < static_cast<Index>(X.tickers.size()) ? X.tickers[i] : std::to_string(i)) +
                            " is constant");
    out.returns.col(i) = c / sd;
  }
  return out;
}

}  // namespace lapgraph
