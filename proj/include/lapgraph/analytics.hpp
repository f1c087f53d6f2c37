#pragma once

// Spectral market indicators over a sequence of estimated graphs and the
// connectivity-gated backtest.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/preprocess.hpp"

namespace lapgraph {

struct IndicatorSeries {
  std::vector<std::string> dates;
  Vector algebraic_connectivity;
  Vector spectral_radius;
  Vector time_consistency;  // length T - 1

  Index size() const { return algebraic_connectivity.size(); }
};

inline IndicatorSeries compute_indicators(std::span<const LaplacianMatrix> L_seq,
                                          const std::vector<std::string>& dates) {
  if (L_seq.empty()) throw ValidationError("compute_indicators: empty graph sequence");
  if (dates.size() != L_seq.size())
    throw ValidationError("compute_indicators: " + std::to_string(L_seq.size()) + " graphs but " +
                          std::to_string(dates.size()) + " dates");
  const Index p = L_seq.front().nodes();
  const Index T = static_cast<Index>(L_seq.size());
  IndicatorSeries out;
  out.dates = dates;
  out.algebraic_connectivity.resize(T);
  out.spectral_radius.resize(T);
  out.time_consistency.resize(T - 1);
  for (Index t = 0; t < T; ++t) {
    const LaplacianMatrix& L = L_seq[static_cast<std::size_t>(t)];
    if (L.nodes() != p)
      throw ValidationError("compute_indicators: graph " + std::to_string(t) + " has p=" +
                            std::to_string(L.nodes()) + ", expected " + std::to_string(p));
    const SpectralSummary s = spectral_summary(L);
    out.algebraic_connectivity[t] = s.algebraic_connectivity;
    out.spectral_radius[t] = s.spectral_radius;
    if (t > 0) out.time_consistency[t - 1] = time_consistency(L, L_seq[static_cast<std::size_t>(t - 1)]);
  }
  return out;
}

struct BacktestResult {
  std::vector<std::string> dates;
  Vector positions;
  Vector daily_pnl;
  Vector cumulative_pnl;
};

inline Vector cumulative_pnl(const Vector& daily) {
  Vector out(daily.size());
  double acc = 0.0;
  for (Index t = 0; t < daily.size(); ++t) out[t] = acc += daily[t];
  return out;
}

namespace detail {

inline BacktestResult run_positions(const ReturnsPanel& returns, Vector positions) {
  BacktestResult r;
  r.dates = returns.dates;
  r.daily_pnl.resize(returns.returns.rows());
  for (Index t = 0; t < returns.returns.rows(); ++t)
    r.daily_pnl[t] = positions[t] == 0.0 ? 0.0 : positions[t] * returns.returns.row(t).mean();
  r.positions = std::move(positions);
  r.cumulative_pnl = cumulative_pnl(r.daily_pnl);
  return r;
}

}  // namespace detail

/// Equal-weight unit budget held every day.
inline BacktestResult strategy_s1(const ReturnsPanel& returns) {
  validate_panel_shape(returns.dates, returns.tickers, returns.returns, "strategy_s1");
  if (returns.returns.rows() < 1) throw ValidationError("strategy_s1: empty return panel");
  return detail::run_positions(returns, Vector::Ones(returns.returns.rows()));
}

/// Invests on day t when the most recent indicator dated strictly before t
/// is below tau (above tau with `invert`). For t >= 1 that indicator must sit
/// on the previous return date. Days with no earlier indicator stay flat.
inline BacktestResult strategy_s2(const ReturnsPanel& returns, const IndicatorSeries& indicators,
                                  double tau = 1.0, bool invert = false) {
  validate_panel_shape(returns.dates, returns.tickers, returns.returns, "strategy_s2");
  const Index n = returns.returns.rows();
  if (n < 1) throw ValidationError("strategy_s2: empty return panel");
  if (std::isnan(tau)) throw ValidationError("strategy_s2: tau is NaN");
  const auto& idates = indicators.dates;
  if (static_cast<Index>(idates.size()) != indicators.algebraic_connectivity.size())
    throw ValidationError("strategy_s2: indicator dates and values differ in length");
  for (std::size_t i = 1; i < idates.size(); ++i)
    if (!(idates[i - 1] < idates[i]))
      throw ValidationError("strategy_s2: indicator dates not strictly increasing at " + idates[i]);

  Vector pos = Vector::Zero(n);
  std::size_t next = 0;  // first indicator not yet usable
  for (Index t = 0; t < n; ++t) {
    const std::string& day = returns.dates[t];
    while (next < idates.size() && idates[next] < day) ++next;
    if (next == 0) continue;
    const std::size_t use = next - 1;
    if (t > 0 && idates[use] != returns.dates[t - 1])
      throw ValidationError("strategy_s2: no indicator on " + returns.dates[t - 1] + " to trade " + day +
                            " (latest is " + idates[use] + ")");
    const double lambda2 = indicators.algebraic_connectivity[static_cast<Index>(use)];
    const bool open = invert ? lambda2 > tau : lambda2 < tau;
    pos[t] = open ? 1.0 : 0.0;
  }
  return detail::run_positions(returns, std::move(pos));
}

/// Rows of `returns` dated strictly after the first indicator date, i.e. the
/// days on which the gated strategy has information.
inline ReturnsPanel tradable_rows(const ReturnsPanel& returns, const IndicatorSeries& indicators) {
  if (indicators.dates.empty()) throw ValidationError("tradable_rows: empty indicator series");
  Index first = 0;
  while (first < returns.returns.rows() && !(indicators.dates.front() < returns.dates[first])) ++first;
  if (first == returns.returns.rows())
    throw ValidationError("tradable_rows: no return dated after the first indicator " + indicators.dates.front());
  return returns.rows(first, returns.returns.rows() - first);
}

/// Least-squares single mean shift: the index b in [1, T) that minimizes the
/// residual sum of squares of a two-level piecewise-constant fit (b is the
/// first index of the second segment).
inline Index mean_shift_change_point(const Vector& x) {
  const Index T = x.size();
  if (T < 2) throw ValidationError("mean_shift_change_point: need at least two observations");
  Vector prefix(T + 1);
  prefix[0] = 0.0;
  for (Index t = 0; t < T; ++t) prefix[t + 1] = prefix[t] + x[t];
  const double total = prefix[T];
  Index best = 1;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (Index b = 1; b < T; ++b) {
    // RSS = sum x^2 - (S_left^2 / b + S_right^2 / (T - b)); maximize the bracket.
    const double left = prefix[b];
    const double right = total - left;
    const double gain = left * left / static_cast<double>(b) + right * right / static_cast<double>(T - b);
    if (gain > best_gain) {
      best_gain = gain;
      best = b;
    }
  }
  return best;
}

/// Mean-shift change point of log algebraic connectivity. The log puts the
/// scale-type indicator on an additive footing before the two-level fit.
inline Index connectivity_change_point(const IndicatorSeries& s) {
  const Vector& l2 = s.algebraic_connectivity;
  if (l2.size() && !(l2.minCoeff() > 0.0))
    throw ValidationError("connectivity_change_point: algebraic connectivity must be positive (disconnected graph)");
  return mean_shift_change_point(l2.array().log().matrix());
}

}  // namespace lapgraph
