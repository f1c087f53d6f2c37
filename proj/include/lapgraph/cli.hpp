#pragma once

// Subcommand implementations behind the lapgraph executable. Each cmd_*
// function reads its inputs, writes its artifacts into cfg.output_dir and
// returns the process exit code (0, or 3 when a solver did not converge).
// Invalid input raises ValidationError, which the executable maps to 2.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lapgraph/analytics.hpp"
#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/io.hpp"
#include "lapgraph/preprocess.hpp"
#include "lapgraph/solvers.hpp"
#include "lapgraph/synth.hpp"
#include "lapgraph/version.hpp"

namespace lapgraph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;

struct RunConfig {
  // data
  std::string input;
  std::string input_kind = "prices";  // prices | returns
  std::string indicators;             // backtest: indicators.csv from learn-tv
  std::string output_dir = ".";
  bool ffill = false;

  // preprocessing
  std::string scale = "correlation";  // covariance | correlation
  std::string market = "keep";        // keep | remove
  std::string market_column;          // proxy ticker; cross-sectional mean when empty
  bool market_intercept = true;

  // estimation
  std::string method = "auto";  // auto | mle | smooth | kcomp
  int k = 1;
  double eta = 10.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double delta = 100.0;
  int memory = 1;
  int max_outer_iters = 300;
  double inner_tol = 1e-7;
  double outer_tol = 1e-5;
  bool eta_growth = false;
  double edge_threshold = 1e-6;

  // rolling windows
  int window = 30;
  int stride = 1;

  // backtest
  double tau = 1.0;
  bool invert_gate = false;

  // synth
  std::string model = "gmrf";  // gmrf | market
  int p = 30;
  int n = 3000;
  double edge_prob = 0.3;
  double weight_lo = 0.5;
  double weight_hi = 1.5;
  double level_scale = 0.0;
  std::string regimes = "115:0.0,114:0.8";  // length:residual_correlation, ...
  double beta_lo = 0.8;
  double beta_hi = 1.2;
  double market_vol = 0.01;
  double residual_vol = 0.01;
  std::string start_date = "2019-01-01";

  std::uint64_t seed = 0;

  void validate() const {
    if (window < 2) throw ValidationError("window must be at least 2 (got " + std::to_string(window) + ")");
    if (stride < 1) throw ValidationError("stride must be at least 1 (got " + std::to_string(stride) + ")");
    if (input_kind != "prices" && input_kind != "returns")
      throw ValidationError("input-kind must be prices or returns, got '" + input_kind + "'");
    if (scale != "covariance" && scale != "correlation")
      throw ValidationError("scale must be covariance or correlation, got '" + scale + "'");
    if (market != "keep" && market != "remove")
      throw ValidationError("market must be keep or remove, got '" + market + "'");
    if (method != "auto" && method != "mle" && method != "smooth" && method != "kcomp")
      throw ValidationError("method must be auto, mle, smooth or kcomp, got '" + method + "'");
    if (model != "gmrf" && model != "market") throw ValidationError("model must be gmrf or market, got '" + model + "'");
    if (!(edge_threshold >= 0.0)) throw ValidationError("edge-threshold must be nonnegative");
    solver_config().validate();
  }

  SolverConfig solver_config() const {
    SolverConfig c;
    c.k = k;
    c.eta = eta;
    c.alpha = alpha;
    c.gamma = gamma;
    c.delta = delta;
    c.memory = memory;
    c.max_outer_iters = max_outer_iters;
    c.inner_tol = inner_tol;
    c.outer_tol = outer_tol;
    c.eta_growth = eta_growth;
    c.seed = seed;
    return c;
  }

  std::string resolved_method() const {
    if (method != "auto") return method;
    return k > 1 ? "kcomp" : "mle";
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"input", c.input},
          {"input_kind", c.input_kind},
          {"indicators", c.indicators},
          {"output_dir", c.output_dir},
          {"ffill", c.ffill},
          {"scale", c.scale},
          {"market", c.market},
          {"market_column", c.market_column},
          {"market_intercept", c.market_intercept},
          {"method", c.resolved_method()},
          {"k", c.k},
          {"eta", c.eta},
          {"alpha", c.alpha},
          {"gamma", c.gamma},
          {"delta", c.delta},
          {"memory", c.memory},
          {"max_outer_iters", c.max_outer_iters},
          {"inner_tol", c.inner_tol},
          {"outer_tol", c.outer_tol},
          {"eta_growth", c.eta_growth},
          {"edge_threshold", c.edge_threshold},
          {"window", c.window},
          {"stride", c.stride},
          {"tau", c.tau},
          {"invert_gate", c.invert_gate},
          {"model", c.model},
          {"p", c.p},
          {"n", c.n},
          {"edge_prob", c.edge_prob},
          {"weight_lo", c.weight_lo},
          {"weight_hi", c.weight_hi},
          {"level_scale", c.level_scale},
          {"regimes", c.regimes},
          {"beta_lo", c.beta_lo},
          {"beta_hi", c.beta_hi},
          {"market_vol", c.market_vol},
          {"residual_vol", c.residual_vol},
          {"start_date", c.start_date},
          {"seed", c.seed}};
}

namespace cli_detail {

inline nlohmann::json report_json(const SolveReport& r) {
  auto finite = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"objective", r.objective_trace.empty() ? nlohmann::json(nullptr) : finite(r.objective_trace.back())},
          {"kkt_residual", finite(r.kkt_residual)},
          {"row_sum_residual", finite(r.residuals.row_sum)},
          {"degree_residual", finite(r.residuals.degree)},
          {"sign_residual", finite(r.residuals.sign)},
          {"nullity", r.nullity},
          {"disconnected", r.disconnected},
          {"degenerate_eigengap", r.degenerate_eigengap},
          {"polished", r.polished}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json meta_header(const char* command, const RunConfig& cfg) {
  return {{"tool", "lapgraph"}, {"version", kVersion}, {"command", command}, {"seed", cfg.seed},
          {"config", to_json(cfg)}};
}

/// Log-returns of a price file, or the returns file as is.
inline ReturnsPanel load_returns(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  DatedPanel d = read_dated_csv(cfg.input, cfg.ffill);
  if (d.dropped_rows) std::fprintf(stderr, "%s: dropped %ld row(s) with missing values\n", cfg.input.c_str(),
                                   static_cast<long>(d.dropped_rows));
  if (d.filled_cells) std::fprintf(stderr, "%s: forward-filled %ld cell(s)\n", cfg.input.c_str(),
                                   static_cast<long>(d.filled_cells));
  ReturnsPanel X;
  if (cfg.input_kind == "prices") {
    X = log_returns(PricePanel{std::move(d.dates), std::move(d.tickers), std::move(d.values)});
  } else {
    X = ReturnsPanel{std::move(d.dates), std::move(d.tickers), std::move(d.values)};
  }
  if (X.returns.rows() < 2) throw ValidationError(cfg.input + ": fewer than two return rows after cleaning");
  return X;
}

inline ReturnsPanel split_market(ReturnsPanel X, const std::string& column, Vector& market) {
  const auto it = std::find(X.tickers.begin(), X.tickers.end(), column);
  if (it == X.tickers.end()) throw ValidationError("market column '" + column + "' is not in the panel");
  const Index c = static_cast<Index>(it - X.tickers.begin());
  market = X.returns.col(c);
  ReturnsPanel out;
  out.dates = X.dates;
  for (Index i = 0; i < X.returns.cols(); ++i)
    if (i != c) out.tickers.push_back(X.tickers[i]);
  out.returns.resize(X.returns.rows(), X.returns.cols() - 1);
  for (Index i = 0, j = 0; i < X.returns.cols(); ++i)
    if (i != c) out.returns.col(j++) = X.returns.col(i);
  return out;
}

/// Asset panel (market column dropped when one is named) and the market
/// series to regress on (empty unless market removal is requested).
inline ReturnsPanel asset_panel(const RunConfig& cfg, const ReturnsPanel& X, Vector& market) {
  market.resize(0);
  if (!cfg.market_column.empty()) {
    ReturnsPanel assets = split_market(X, cfg.market_column, market);
    if (cfg.market == "keep") market.resize(0);
    return assets;
  }
  if (cfg.market == "remove") market = cross_sectional_mean(X);
  return X;
}

inline ReturnsPanel preprocess_window(const RunConfig& cfg, const ReturnsPanel& X, const Vector& market) {
  if (market.size() == 0) return X;
  return remove_market_factor(X, market, cfg.market_intercept).residuals;
}

inline SimilarityKind kind_of(const RunConfig& cfg) {
  return cfg.scale == "covariance" ? SimilarityKind::covariance : SimilarityKind::correlation;
}

inline void write_edges(const std::filesystem::path& path, const LaplacianMatrix& L,
                        const std::vector<std::string>& tickers, double threshold) {
  std::ofstream out = detail::open_output(path);
  out << "i,j,weight\n";
  const Index p = L.nodes();
  const Vector w = L.weights().values();
  for (Index m = 0; m < w.size(); ++m) {
    if (!(w[m] > threshold)) continue;
    const auto [i, j] = pair_nodes(m, p);
    out << tickers[i] << ',' << tickers[j] << ',' << format_number(w[m]) << '\n';
  }
}

inline void write_strings(const std::filesystem::path& path, const std::string& header,
                          const std::vector<std::string>& rows) {
  std::ofstream out = detail::open_output(path);
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
}

inline std::string laplacian_file(std::size_t t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "laplacian_%04zu.csv", t);
  return buf;
}

inline std::vector<Regime> parse_regimes(const std::string& spec) {
  std::vector<Regime> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ValidationError("regimes: expected length:correlation pairs, got '" + item + "'");
    const auto len = detail::parse_number(item.substr(0, colon));
    const auto rho = detail::parse_number(item.substr(colon + 1));
    if (!len || !rho || *len < 1.0 || std::floor(*len) != *len)
      throw ValidationError("regimes: bad entry '" + item + "'");
    out.push_back({static_cast<Index>(*len), *rho});
  }
  if (out.empty()) throw ValidationError("regimes: empty specification");
  return out;
}

}  // namespace cli_detail

/// Static graph on the whole input panel.
inline int cmd_learn(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ReturnsPanel X = cli_detail::load_returns(cfg);
  Vector market;
  const ReturnsPanel assets = cli_detail::asset_panel(cfg, X, market);
  const ReturnsPanel R = cli_detail::preprocess_window(cfg, assets, market);
  const std::string method = cfg.resolved_method();
  const SolverConfig sc = cfg.solver_config();

  std::optional<Estimate> est;
  if (method == "smooth") {
    const ReturnsPanel Y = cfg.scale == "correlation" ? normalize_columns(R) : R;
    SmoothGraphEstimate sg = learn_smooth_graph(distance_matrix(Y), sc);
    est = Estimate{LaplacianMatrix(sg.weights), std::move(sg.report)};
  } else {
    const SimilarityMatrix S = similarity(R, cli_detail::kind_of(cfg));
    est = method == "kcomp" ? learn_k_component(S, sc) : learn_connected_mle(S, sc);
  }

  const std::filesystem::path out(cfg.output_dir);
  write_matrix_csv(out / "laplacian.csv", est->laplacian.matrix());
  cli_detail::write_edges(out / "edges.csv", est->laplacian, assets.tickers, cfg.edge_threshold);
  nlohmann::json meta = cli_detail::meta_header("learn", cfg);
  meta["tickers"] = assets.tickers;
  meta["observations"] = R.returns.rows();
  meta["first_date"] = R.dates.front();
  meta["last_date"] = R.dates.back();
  meta["result"] = cli_detail::report_json(est->report);
  meta["converged"] = est->report.converged;
  meta["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cli_detail::write_json(out / "meta.json", meta);
  return est->report.converged ? kExitOk : kExitNotConverged;
}

/// Number of rolling windows over n rows.
inline Index window_count(Index rows, int window, int stride) {
  if (rows < window) return 0;
  return (rows - window) / stride + 1;
}

/// Causal rolling estimation, one Laplacian per window, plus indicators.
inline int cmd_learn_tv(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ReturnsPanel X = cli_detail::load_returns(cfg);
  Vector market;
  const ReturnsPanel assets = cli_detail::asset_panel(cfg, X, market);
  const Index T = window_count(assets.returns.rows(), cfg.window, cfg.stride);
  if (T < 1)
    throw ValidationError("learn-tv: " + std::to_string(assets.returns.rows()) +
                          " return rows are fewer than one window of " + std::to_string(cfg.window));

  CausalGraphTracker tracker(assets.returns.cols(), cfg.solver_config());
  std::vector<std::string> window_dates;
  std::vector<std::string> window_rows;
  const std::filesystem::path out(cfg.output_dir);
  bool all_converged = true;
  for (Index t = 0; t < T; ++t) {
    const Index first = t * cfg.stride;
    const ReturnsPanel win = assets.rows(first, cfg.window);
    const Vector m = market.size() ? Vector(market.segment(first, cfg.window)) : Vector();
    const ReturnsPanel R = cli_detail::preprocess_window(cfg, win, m);
    const SimilarityMatrix S = similarity(R, cli_detail::kind_of(cfg));
    const LaplacianMatrix& L = tracker.push(S.matrix(), static_cast<double>(cfg.window));
    all_converged = all_converged && tracker.reports().back().converged;
    write_matrix_csv(out / "laplacians" / cli_detail::laplacian_file(static_cast<std::size_t>(t)), L.matrix());
    window_dates.push_back(win.dates.back());
    window_rows.push_back(std::to_string(t) + "," + win.dates.back() + "," + win.dates.front());
  }
  cli_detail::write_strings(out / "windows.csv", "index,date,first_date", window_rows);
  const IndicatorSeries ind = compute_indicators(tracker.estimates(), window_dates);
  write_indicators_csv(out / "indicators.csv", ind);

  nlohmann::json meta = cli_detail::meta_header("learn-tv", cfg);
  meta["tickers"] = assets.tickers;
  meta["windows"] = T;
  nlohmann::json per = nlohmann::json::array();
  for (const SolveReport& r : tracker.reports()) per.push_back(cli_detail::report_json(r));
  meta["results"] = per;
  meta["converged"] = all_converged;
  meta["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cli_detail::write_json(out / "meta.json", meta);
  return all_converged ? kExitOk : kExitNotConverged;
}

/// Recomputes indicators.csv from a learn-tv output directory (laplacians/
/// and windows.csv).
inline int cmd_indicators(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input.empty()) throw ValidationError("--input (a learn-tv output directory) is required");
  const std::filesystem::path in(cfg.input);
  const std::filesystem::path dir = std::filesystem::is_directory(in / "laplacians") ? in / "laplacians" : in;
  if (!std::filesystem::is_directory(dir)) throw ValidationError(cfg.input + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("laplacian_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError(dir.string() + ": no laplacian_*.csv files");

  std::vector<LaplacianMatrix> seq;
  for (const auto& f : files) {
    try {
      seq.push_back(laplacian_from_dense(read_matrix_csv(f)));
    } catch (const ValidationError& e) {
      throw ValidationError(f.string() + ": " + e.what());
    }
  }
  std::vector<std::string> dates;
  const std::filesystem::path windows = in / "windows.csv";
  if (std::filesystem::exists(windows)) {
    std::ifstream w(windows);
    std::string line;
    std::getline(w, line);
    while (std::getline(w, line)) {
      const auto cells = detail::split_csv_line(line);
      if (cells.size() >= 2) dates.push_back(cells[1]);
    }
    if (dates.size() != seq.size())
      throw ValidationError(windows.string() + " lists " + std::to_string(dates.size()) + " windows but " +
                            std::to_string(seq.size()) + " matrices were found");
  } else {
    const auto start = business_days(cfg.start_date, seq.size());
    dates = start;
  }
  const IndicatorSeries ind = compute_indicators(seq, dates);
  write_indicators_csv(std::filesystem::path(cfg.output_dir) / "indicators.csv", ind);
  return kExitOk;
}

/// S1 versus connectivity-gated S2 on the days covered by the indicators.
inline int cmd_backtest(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.indicators.empty()) throw ValidationError("--indicators is required");
  const IndicatorSeries ind = read_indicators_csv(cfg.indicators);
  ReturnsPanel X = cli_detail::load_returns(cfg);
  if (!cfg.market_column.empty()) {
    Vector unused;
    X = cli_detail::split_market(std::move(X), cfg.market_column, unused);
  }
  const ReturnsPanel days = tradable_rows(X, ind);
  const BacktestResult s1 = strategy_s1(days);
  const BacktestResult s2 = strategy_s2(days, ind, cfg.tau, cfg.invert_gate);

  const std::filesystem::path out(cfg.output_dir);
  std::ofstream f = detail::open_output(out / "pnl.csv");
  f << "date,s1_cum,s2_cum,position\n";
  for (Index t = 0; t < s1.cumulative_pnl.size(); ++t)
    f << days.dates[t] << ',' << format_number(s1.cumulative_pnl[t]) << ',' << format_number(s2.cumulative_pnl[t])
      << ',' << format_number(s2.positions[t]) << '\n';
  f.close();

  nlohmann::json meta = cli_detail::meta_header("backtest", cfg);
  meta["days"] = days.returns.rows();
  meta["invested_days"] = s2.positions.sum();
  meta["s1_total"] = s1.cumulative_pnl.size() ? s1.cumulative_pnl[s1.cumulative_pnl.size() - 1] : 0.0;
  meta["s2_total"] = s2.cumulative_pnl.size() ? s2.cumulative_pnl[s2.cumulative_pnl.size() - 1] : 0.0;
  meta["converged"] = true;
  cli_detail::write_json(out / "meta.json", meta);
  return kExitOk;
}

/// Planted-truth fixtures: a k-component GMRF panel or a factor market.
inline int cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.p < 2) throw ValidationError("p must be at least 2");
  const std::filesystem::path out(cfg.output_dir);
  nlohmann::json meta = cli_detail::meta_header("synth", cfg);
  if (cfg.model == "gmrf") {
    if (cfg.n < 2) throw ValidationError("n must be at least 2");
    const PlantedGraph g =
        random_k_component_graph(cfg.p, cfg.k, {cfg.weight_lo, cfg.weight_hi}, cfg.seed, cfg.edge_prob);
    const ReturnsPanel X = sample_gmrf_with_levels(g.laplacian, cfg.n, cfg.seed + 1, cfg.level_scale, cfg.start_date);
    write_dated_csv(out / "returns.csv", X.dates, X.tickers, X.returns);
    write_matrix_csv(out / "truth_laplacian.csv", g.laplacian.matrix());
    std::vector<std::string> rows;
    for (Index i = 0; i < cfg.p; ++i) rows.push_back(X.tickers[i] + "," + std::to_string(g.labels[i]));
    cli_detail::write_strings(out / "truth_labels.csv", "ticker,component", rows);
    meta["nullity"] = num_components(g.laplacian);
    meta["edges"] = g.edge_support.size();
  } else {
    FactorMarketSpec spec;
    spec.p = cfg.p;
    spec.regimes = cli_detail::parse_regimes(cfg.regimes);
    spec.n = 0;
    for (const Regime& r : spec.regimes) spec.n += r.length;
    spec.beta_lo = cfg.beta_lo;
    spec.beta_hi = cfg.beta_hi;
    spec.market_vol = cfg.market_vol;
    spec.residual_vol = cfg.residual_vol;
    spec.seed = cfg.seed;
    spec.start_date = cfg.start_date;
    const FactorMarket fm = simulate_factor_market(spec);
    // the market series rides along as an extra price column named MKT
    ReturnsPanel with_market = fm.returns;
    with_market.tickers.push_back("MKT");
    with_market.returns.conservativeResize(Eigen::NoChange, cfg.p + 1);
    with_market.returns.col(cfg.p) = fm.market;
    const PricePanel prices = prices_from_returns(with_market);
    write_dated_csv(out / "prices.csv", prices.dates, prices.tickers, prices.prices);
    write_dated_csv(out / "market.csv", fm.returns.dates, {"market"}, fm.market);
    std::vector<std::string> rows;
    for (std::size_t r = 0; r < fm.regime_starts.size(); ++r)
      rows.push_back(std::to_string(r) + "," + std::to_string(fm.regime_starts[r]) + "," +
                     fm.returns.dates[static_cast<std::size_t>(fm.regime_starts[r])] + "," +
                     format_number(spec.regimes[r].residual_correlation));
    cli_detail::write_strings(out / "regimes.csv", "regime,first_row,first_date,residual_correlation", rows);
    std::vector<std::string> betas;
    for (Index i = 0; i < cfg.p; ++i) betas.push_back(fm.returns.tickers[i] + "," + format_number(fm.betas[i]));
    cli_detail::write_strings(out / "truth_betas.csv", "ticker,beta", betas);
    meta["rows"] = spec.n;
  }
  meta["converged"] = true;
  cli_detail::write_json(out / "meta.json", meta);
  return kExitOk;
}

}  // namespace lapgraph
