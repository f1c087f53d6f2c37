#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "lapgraph/cli.hpp"

namespace {

void add_options(CLI::App& app, lapgraph::RunConfig& c) {
  app.add_option("--input", c.input, "Price or returns CSV (learn, learn-tv, backtest) or a learn-tv output directory (indicators)");
  app.add_option("--input-kind", c.input_kind, "prices | returns")->check(CLI::IsMember({"prices", "returns"}));
  app.add_option("--indicators", c.indicators, "indicators.csv used by backtest");
  app.add_option("--output-dir", c.output_dir, "Directory for all artifacts");
  app.add_flag("--ffill", c.ffill, "Forward-fill missing cells instead of dropping the row");

  app.add_option("--scale", c.scale, "covariance | correlation")->check(CLI::IsMember({"covariance", "correlation"}));
  app.add_option("--market", c.market, "keep | remove")->check(CLI::IsMember({"keep", "remove"}));
  app.add_option("--market-column", c.market_column, "Ticker used as the market proxy (dropped from the assets)");
  app.add_flag("!--no-intercept", c.market_intercept, "Regress on the market without an intercept");

  app.add_option("--method", c.method, "auto | mle | smooth | kcomp")
      ->check(CLI::IsMember({"auto", "mle", "smooth", "kcomp"}));
  app.add_option("--k", c.k, "Number of graph components");
  app.add_option("--eta", c.eta, "Weight of the k-component spectral term");
  app.add_flag("--eta-growth", c.eta_growth, "Double eta every outer iteration (capped at 1e4 x eta)");
  app.add_option("--alpha", c.alpha, "l1 weight (mle) or log-degree weight (smooth)");
  app.add_option("--gamma", c.gamma, "Frobenius weight (smooth)");
  app.add_option("--delta", c.delta, "Temporal link weight (learn-tv)");
  app.add_option("--memory", c.memory, "Windows re-estimated jointly (learn-tv)");
  app.add_option("--max-outer-iters", c.max_outer_iters, "Outer iteration limit");
  app.add_option("--inner-tol", c.inner_tol, "Inner projected-gradient tolerance");
  app.add_option("--outer-tol", c.outer_tol, "Outer relative change tolerance");
  app.add_option("--edge-threshold", c.edge_threshold, "Weights above this are listed in edges.csv");

  app.add_option("--window", c.window, "Rolling window length in return rows");
  app.add_option("--stride", c.stride, "Rows between consecutive windows");

  app.add_option("--tau", c.tau, "Connectivity gate threshold");
  app.add_flag("--invert-gate", c.invert_gate, "Invest when connectivity is above tau");

  app.add_option("--model", c.model, "synth: gmrf | market")->check(CLI::IsMember({"gmrf", "market"}));
  app.add_option("--p", c.p, "synth: number of assets");
  app.add_option("--n", c.n, "synth: number of rows (gmrf)");
  app.add_option("--edge-prob", c.edge_prob, "synth: extra intra-component edge probability");
  app.add_option("--weight-lo", c.weight_lo, "synth: smallest planted weight");
  app.add_option("--weight-hi", c.weight_hi, "synth: largest planted weight");
  app.add_option("--level-scale", c.level_scale, "synth: per-component level shock scale (gmrf)");
  app.add_option("--regimes", c.regimes, "synth: length:residual_correlation,... (market)");
  app.add_option("--beta-lo", c.beta_lo, "synth: smallest market beta");
  app.add_option("--beta-hi", c.beta_hi, "synth: largest market beta");
  app.add_option("--market-vol", c.market_vol, "synth: market return volatility");
  app.add_option("--residual-vol", c.residual_vol, "synth: residual volatility");
  app.add_option("--start-date", c.start_date, "synth: first return date");

  app.add_option("--seed", c.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  lapgraph::RunConfig cfg;
  CLI::App app{"Graph Laplacian learning for return panels"};
  app.set_version_flag("--version", lapgraph::kVersion);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  add_options(app, cfg);

  int (*command)(const lapgraph::RunConfig&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*fn)(const lapgraph::RunConfig&)) {
    app.add_subcommand(name, help)->fallthrough()->callback([&command, fn] { command = fn; });
  };
  sub("learn", "Estimate one graph from the whole panel", lapgraph::cmd_learn);
  sub("learn-tv", "Causal rolling-window graphs and indicators", lapgraph::cmd_learn_tv);
  sub("backtest", "Compare the always-invested and connectivity-gated strategies", lapgraph::cmd_backtest);
  sub("synth", "Write planted-truth fixtures", lapgraph::cmd_synth);
  sub("indicators", "Recompute indicators.csv from stored Laplacians", lapgraph::cmd_indicators);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lapgraph::kExitValidation;
  }

  try {
    return command(cfg);
  } catch (const lapgraph::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return lapgraph::kExitValidation;
  } catch (const lapgraph::DisconnectedGraphError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return lapgraph::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
