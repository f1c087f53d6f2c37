#pragma once

// Graph estimators:
//   learn_connected_mle   penalized Laplacian maximum likelihood
//   learn_smooth_graph    log-degree barrier smooth-signal graph
//   learn_k_component     alternating fan-subspace / unit-degree Laplacian updates
//   learn_time_varying    causal rolling estimation with a Frobenius link
//
// All Laplacian solvers work on the pair-weight vector w >= 0, so symmetry,
// zero row sums and the sign pattern hold by construction. The log
// pseudo-determinant of a connected L is evaluated as log det(L + 11^T/p).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lapgraph/detail/nonneg_newton.hpp"
#include "lapgraph/detail/pair_ops.hpp"
#include "lapgraph/detail/problems.hpp"
#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/preprocess.hpp"

namespace lapgraph {

struct SolverConfig {
  int max_outer_iters = 300;
  double inner_tol = 1e-7;   // projected-gradient infinity norm
  double outer_tol = 1e-5;   // relative Frobenius change of L between outer iterations
  double eta = 10.0;         // weight of tr(V^T L V)
  double alpha = 0.0;        // l1 weight (MLE) or log-degree weight (smooth graph)
  double gamma = 0.0;        // Frobenius weight (smooth graph)
  double delta = 100.0;      // temporal link weight
  int k = 1;                 // number of components
  int memory = 1;            // windows re-estimated jointly in learn_time_varying
  std::uint64_t seed = 0;
  bool eta_growth = false;   // double eta every outer iteration, capped at 1e4 * eta
  bool polish_components = true;
  int max_inner_iters = 500;
  double degree_tol = 1e-9;  // target for |deg_i - 1| in unit-degree solves

  void validate() const {
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(degree_tol > 0.0))
      throw ValidationError("SolverConfig: tolerances must be positive");
    if (max_outer_iters < 1 || max_inner_iters < 1)
      throw ValidationError("SolverConfig: iteration limits must be at least 1");
    if (eta < 0.0 || alpha < 0.0 || gamma < 0.0 || delta < 0.0)
      throw ValidationError("SolverConfig: eta, alpha, gamma and delta must be nonnegative");
    if (k < 1) throw ValidationError("SolverConfig: k must be at least 1");
    if (memory < 1) throw ValidationError("SolverConfig: memory must be at least 1");
  }
};

struct ConstraintResiduals {
  double row_sum = 0.0;  // max |(L 1)_i|
  double degree = std::numeric_limits<double>::quiet_NaN();  // max |L_ii - 1|, unit-degree solves only
  double sign = 0.0;     // largest positive off-diagonal entry
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> objective_trace;
  ConstraintResiduals residuals;
  double kkt_residual = 0.0;
  bool converged = false;
  bool disconnected = false;        // estimate has more than one component
  bool degenerate_eigengap = false;  // lambda_k == lambda_{k+1} met in a fan update
  bool polished = false;             // k-component result re-solved on its partition
  int nullity = 0;
};

struct Estimate {
  LaplacianMatrix laplacian;
  SolveReport report;
};

namespace detail {

inline void validate_similarity(const Matrix& S, const char* who) {
  if (S.rows() != S.cols() || S.rows() < 2)
    throw ValidationError(std::string(who) + ": expected a square matrix with p >= 2");
  if (!S.allFinite()) throw ValidationError(std::string(who) + ": non-finite entries");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError(std::string(who) + ": matrix is not symmetric");
}

inline NonnegOptions inner_options(const SolverConfig& cfg) {
  NonnegOptions o;
  o.tol = cfg.inner_tol;
  o.max_iters = cfg.max_inner_iters;
  return o;
}

inline void finish_report(const LaplacianMatrix& L, SolveReport& r, bool unit_degree) {
  const Matrix& M = L.matrix();
  const Index p = M.rows();
  r.residuals.row_sum = 0.0;
  r.residuals.sign = 0.0;
  for (Index i = 0; i < p; ++i) {
    r.residuals.row_sum = std::max(r.residuals.row_sum, std::abs(M.row(i).sum()));
    for (Index j = 0; j < p; ++j)
      if (i != j) r.residuals.sign = std::max(r.residuals.sign, M(i, j));
  }
  if (unit_degree) r.residuals.degree = (M.diagonal().array() - 1.0).abs().maxCoeff();
  r.nullity = num_components(L);
  r.disconnected = r.nullity > 1;
}

inline Vector full_weights(Index p, const PairList& pairs, const Vector& w) {
  Vector out = Vector::Zero(num_pairs(p));
  for (std::size_t e = 0; e < pairs.size(); ++e)
    out[pair_index(pairs[e].first, pairs[e].second, p)] = w[static_cast<Index>(e)];
  return out;
}

/// Warm-startable state of the unit-degree augmented-Lagrangian solve.
struct UnitDegreeState {
  Vector w;
  Vector y;
  double rho = 1.0;
};

struct UnitDegreeOutcome {
  int iterations = 0;
  double degree_residual = kInf;
  double kkt = kInf;
  bool converged = false;
  std::vector<double> trace;  // base objective after each multiplier update
};

/// min base(w) s.t. w >= 0 and every node degree equals 1, by an augmented
/// Lagrangian on the degree equalities.
inline UnitDegreeOutcome solve_unit_degree(const LogdetProblem& base, UnitDegreeState& st,
                                           const SolverConfig& cfg) {
  const Index p = base.nodes();
  const Vector target = Vector::Ones(p);
  if (st.y.size() != p) st.y = Vector::Zero(p);
  UnitDegreeOutcome out;
  double previous = kInf;
  const NonnegOptions opt = inner_options(cfg);
  for (int outer = 0; outer < 60; ++outer) {
    AugmentedDegreeProblem<LogdetProblem> aug(base, target, st.y, st.rho);
    const NonnegResult r = minimize_nonnegative(aug, st.w, opt);
    st.w = r.x;
    out.iterations += r.iterations;
    out.kkt = r.pg_norm;
    const Vector res = aug.residual(st.w);
    out.degree_residual = res.cwiseAbs().maxCoeff();
    out.trace.push_back(base.value(st.w));
    if (out.degree_residual <= cfg.degree_tol && r.converged) {
      out.converged = true;
      break;
    }
    st.y += st.rho * res;
    if (out.degree_residual > 0.25 * previous) st.rho = std::min(st.rho * 10.0, 1e10);
    previous = out.degree_residual;
  }
  return out;
}

/// Splits the nodes into exactly k groups by cutting the k-1 lightest edges of
/// a maximum-weight spanning forest (Kruskal on descending weights).
inline std::vector<int> heaviest_forest_partition(const GraphWeights& w, int k) {
  const Index p = w.nodes();
  std::vector<Index> order(w.values().size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return w.values()[a] > w.values()[b]; });
  std::vector<Index> parent(p);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Index groups = p;
  Vector kept = Vector::Zero(w.values().size());
  for (Index m : order) {
    if (groups <= k) break;
    const auto [i, j] = pair_nodes(m, p);
    const Index a = find(i);
    const Index b = find(j);
    if (a == b) continue;
    parent[a] = b;
    kept[m] = 1.0;
    --groups;
  }
  return component_labels(GraphWeights(p, kept), 0.5);
}

}  // namespace detail

/// tr(L S) - log gdet(L) + alpha * sum_{i != j} |L_ij|.
inline double mle_objective(const LaplacianMatrix& L, const Matrix& S, double alpha = 0.0) {
  return (L.matrix() * S).trace() - log_gdet(L) + 2.0 * alpha * L.weights().values().sum();
}

/// tr(L S) - log det(L + 11^T/p) + eta * tr(V^T L V); +inf when L + 11^T/p is singular.
inline double k_component_objective(const LaplacianMatrix& L, const Matrix& S, const Matrix& V, double eta) {
  const auto ld = log_det_shifted(L.matrix(), ones_projector(L.nodes()));
  if (!ld) return std::numeric_limits<double>::infinity();
  return (L.matrix() * S).trace() - *ld + eta * (V.transpose() * L.matrix() * V).trace();
}

// ---------------------------------------------------------------------------

inline Estimate learn_connected_mle(const Matrix& S, const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::validate_similarity(S, "learn_connected_mle");
  const Index p = S.rows();
  auto pairs = all_pairs(p);
  Vector c = detail::laplacian_adjoint(S, pairs);
  c.array() += 2.0 * cfg.alpha;
  const detail::LogdetProblem prob(p, pairs, std::move(c), ones_projector(p));
  const detail::NonnegResult r =
      detail::minimize_nonnegative(prob, Vector::Constant(num_pairs(p), 1.0 / static_cast<double>(p - 1)),
                                   detail::inner_options(cfg));
  Estimate est{LaplacianMatrix(GraphWeights(p, r.x)), {}};
  est.report.iterations = r.iterations;
  est.report.objective_trace = r.trace;
  est.report.kkt_residual = r.pg_norm;
  est.report.converged = r.converged && !r.diverged;
  detail::finish_report(est.laplacian, est.report, false);
  return est;
}

inline Estimate learn_connected_mle(const SimilarityMatrix& S, const SolverConfig& cfg = {}) {
  return learn_connected_mle(S.matrix(), cfg);
}

struct SmoothGraphEstimate {
  GraphWeights weights;
  SolveReport report;
};

inline SmoothGraphEstimate learn_smooth_graph(const Matrix& Z, const SolverConfig& cfg) {
  cfg.validate();
  if (Z.rows() != Z.cols() || Z.rows() < 2)
    throw ValidationError("learn_smooth_graph: expected a square distance matrix with p >= 2");
  if (!Z.allFinite()) throw ValidationError("learn_smooth_graph: non-finite entries");
  if (!(cfg.alpha > 0.0)) throw ValidationError("learn_smooth_graph: alpha must be positive");
  if (!(cfg.gamma > 0.0)) throw ValidationError("learn_smooth_graph: gamma must be positive");
  const Index p = Z.rows();
  const double scale = std::max(1.0, Z.cwiseAbs().maxCoeff());
  Vector z(num_pairs(p));
  Index m = 0;
  for (Index i = 0; i < p; ++i) {
    if (std::abs(Z(i, i)) > 1e-12 * scale)
      throw ValidationError("learn_smooth_graph: distance matrix has a nonzero diagonal");
    for (Index j = i + 1; j < p; ++j, ++m) {
      if (Z(i, j) < 0.0 || Z(j, i) < 0.0)
        throw ValidationError("learn_smooth_graph: negative distance at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      if (std::abs(Z(i, j) - Z(j, i)) > 1e-10 * scale)
        throw ValidationError("learn_smooth_graph: distance matrix is not symmetric");
      z[m] = 0.5 * (Z(i, j) + Z(j, i));
    }
  }
  const detail::SmoothGraphProblem prob(p, std::move(z), cfg.alpha, cfg.gamma);
  const detail::NonnegResult r = detail::minimize_nonnegative(
      prob, Vector::Constant(num_pairs(p), 1.0 / static_cast<double>(p - 1)), detail::inner_options(cfg));
  SmoothGraphEstimate est{GraphWeights(p, r.x), {}};
  est.report.iterations = r.iterations;
  est.report.objective_trace = r.trace;
  est.report.kkt_residual = r.pg_norm;
  est.report.converged = r.converged && !r.diverged;
  detail::finish_report(LaplacianMatrix(est.weights), est.report, false);
  return est;
}

// ---------------------------------------------------------------------------
// k-component estimation

struct FanSubspace {
  Matrix basis;        // p x k, orthonormal columns
  Vector eigenvalues;  // the k smallest, ascending
  bool degenerate = false;  // lambda_k ties lambda_{k+1}
};

/// Eigenvectors of the k smallest eigenvalues: the minimizer of tr(V^T L V)
/// over orthonormal p x k matrices.
inline FanSubspace fan_subspace(const LaplacianMatrix& L, int k) {
  const Index p = L.nodes();
  if (k < 1 || k >= p)
    throw ValidationError("fan_subspace: k must satisfy 1 <= k < p (k=" + std::to_string(k) +
                          ", p=" + std::to_string(p) + ")");
  const EigenDecomposition eig = symmetric_eigen(L.matrix());
  FanSubspace out;
  out.basis = eig.eigenvectors.leftCols(k);
  out.eigenvalues = eig.eigenvalues.head(k);
  out.degenerate = eig.eigenvalues[k] - eig.eigenvalues[k - 1] <= default_zero_tol(eig.eigenvalues);
  return out;
}

/// min tr(L K) - log gdet(L) over Laplacians with unit diagonal.
inline Estimate solve_l_subproblem(const Matrix& K, const SolverConfig& cfg = {}) {
  cfg.validate();
  detail::validate_similarity(K, "solve_l_subproblem");
  const Index p = K.rows();
  auto pairs = all_pairs(p);
  const detail::LogdetProblem prob(p, pairs, detail::laplacian_adjoint(K, pairs), ones_projector(p));
  detail::UnitDegreeState st{Vector::Constant(num_pairs(p), 1.0 / static_cast<double>(p - 1)), Vector::Zero(p), 1.0};
  const detail::UnitDegreeOutcome r = detail::solve_unit_degree(prob, st, cfg);
  Estimate est{LaplacianMatrix(GraphWeights(p, st.w)), {}};
  est.report.iterations = r.iterations;
  est.report.objective_trace = r.trace;
  est.report.kkt_residual = r.kkt;
  est.report.converged = r.converged;
  detail::finish_report(est.laplacian, est.report, true);
  return est;
}

/// Alternates fan_subspace and the unit-degree Laplacian update on
/// K = S + eta V V^T until the relative Frobenius change of L drops below
/// outer_tol. The objective trace holds the relaxed objective after every
/// V-update and every L-update.
///
/// With polish_components set and k > 1, the final graph is split into k
/// groups along its heaviest spanning forest and re-estimated on that
/// partition with the exact pseudo-determinant, which yields exactly k
/// components with unit degrees.
inline Estimate learn_k_component(const Matrix& S, const SolverConfig& cfg,
                                  const std::optional<LaplacianMatrix>& initial = std::nullopt) {
  cfg.validate();
  detail::validate_similarity(S, "learn_k_component");
  const Index p = S.rows();
  if (cfg.k >= p)
    throw ValidationError("learn_k_component: k must be smaller than p (k=" + std::to_string(cfg.k) +
                          ", p=" + std::to_string(p) + ")");
  const Matrix J = ones_projector(p);
  const auto pairs = all_pairs(p);

  SolveReport report;
  detail::UnitDegreeState st{Vector::Constant(num_pairs(p), 1.0 / static_cast<double>(p - 1)), Vector::Zero(p), 1.0};
  bool inner_ok = true;
  if (initial) {
    if (initial->nodes() != p) throw ValidationError("learn_k_component: initial estimate has the wrong size");
    st.w = initial->weights().values();
  } else {
    const detail::LogdetProblem prob(p, pairs, detail::laplacian_adjoint(S, pairs), J);
    const auto r = detail::solve_unit_degree(prob, st, cfg);
    inner_ok = r.converged;
  }
  LaplacianMatrix L{GraphWeights(p, st.w)};

  double eta = cfg.eta;
  bool converged = false;
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    const FanSubspace fan = fan_subspace(L, cfg.k);
    report.degenerate_eigengap = report.degenerate_eigengap || fan.degenerate;
    report.objective_trace.push_back(k_component_objective(L, S, fan.basis, eta));

    const Matrix K = S + eta * fan.basis * fan.basis.transpose();
    const detail::LogdetProblem prob(p, pairs, detail::laplacian_adjoint(K, pairs), J);
    const auto r = detail::solve_unit_degree(prob, st, cfg);
    inner_ok = r.converged;
    report.kkt_residual = r.kkt;
    LaplacianMatrix next{GraphWeights(p, st.w)};
    report.objective_trace.push_back(k_component_objective(next, S, fan.basis, eta));

    const double change = (next.matrix() - L.matrix()).norm() / std::max(L.matrix().norm(), 1e-300);
    L = std::move(next);
    report.iterations = outer + 1;
    if (change <= cfg.outer_tol) {
      converged = true;
      break;
    }
    if (cfg.eta_growth) eta = std::min(2.0 * eta, 1e4 * cfg.eta);
  }

  if (cfg.k > 1 && cfg.polish_components) {
    const std::vector<int> label = detail::heaviest_forest_partition(L.weights(), cfg.k);
    std::vector<Index> size(cfg.k, 0);
    for (int c : label) ++size[c];
    if (*std::min_element(size.begin(), size.end()) >= 2) {
      detail::PairList intra;
      std::vector<double> init;
      for (const auto& [i, j] : pairs)
        if (label[i] == label[j]) {
          intra.emplace_back(i, j);
          init.push_back(1.0 / static_cast<double>(size[label[i]] - 1));
        }
      Matrix P = Matrix::Zero(p, p);
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
          if (label[i] == label[j]) P(i, j) = 1.0 / static_cast<double>(size[label[i]]);
      const detail::LogdetProblem prob(p, intra, detail::laplacian_adjoint(S, intra), P);
      detail::UnitDegreeState pst{Eigen::Map<Vector>(init.data(), static_cast<Index>(init.size())),
                                  Vector::Zero(p), 1.0};
      const auto r = detail::solve_unit_degree(prob, pst, cfg);
      inner_ok = r.converged;
      report.kkt_residual = r.kkt;
      L = LaplacianMatrix(GraphWeights(p, detail::full_weights(p, intra, pst.w)));
      report.polished = true;
    }
  }

  report.converged = converged && inner_ok;
  detail::finish_report(L, report, true);
  return {std::move(L), std::move(report)};
}

inline Estimate learn_k_component(const SimilarityMatrix& S, const SolverConfig& cfg,
                                  const std::optional<LaplacianMatrix>& initial = std::nullopt) {
  return learn_k_component(S.matrix(), cfg, initial);
}

// ---------------------------------------------------------------------------
// Time-varying estimation

/// Causal rolling estimator. Each push(S_t, n_t) solves
///   sum_s n_s [tr(S_s L_s) - log gdet(L_s)] + delta * sum ||L_s - L_{s-1}||_F^2
/// jointly over the last min(memory, t) windows, linked to the stored
/// estimate just before them, and records the newest L_s as the estimate for
/// time t. Nothing pushed later can change an estimate already returned.
class CausalGraphTracker {
 public:
  CausalGraphTracker(Index p, SolverConfig cfg) : p_(p), cfg_(std::move(cfg)), pairs_(detail::PairList(all_pairs(p))) {
    cfg_.validate();
    if (p_ < 2) throw ValidationError("CausalGraphTracker: need p >= 2");
  }

  const LaplacianMatrix& push(const Matrix& S, double n_samples) {
    detail::validate_similarity(S, "CausalGraphTracker::push");
    if (S.rows() != p_)
      throw ValidationError("CausalGraphTracker::push: window " + std::to_string(weights_.size()) + " has p=" +
                            std::to_string(S.rows()) + ", expected " + std::to_string(p_));
    if (!(n_samples >= 1.0)) throw ValidationError("CausalGraphTracker::push: sample count must be >= 1");

    window_.push_back({detail::laplacian_adjoint(S, pairs_), n_samples});
    if (window_.size() > static_cast<std::size_t>(cfg_.memory)) window_.pop_front();

    const std::size_t t = weights_.size();
    const std::size_t m = window_.size();
    const Index block = num_pairs(p_);
    const Matrix J = ones_projector(p_);

    std::vector<detail::LogdetProblem> blocks;
    blocks.reserve(m);
    for (const auto& [c, n] : window_) blocks.emplace_back(p_, pairs_, c, J, n);
    std::optional<Vector> anchor;
    if (t >= m && cfg_.delta > 0.0) anchor = weights_[t - m];

    Vector x0(block * static_cast<Index>(m));
    const Vector uniform = Vector::Constant(block, 1.0 / static_cast<double>(p_ - 1));
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t time = t - m + 1 + s;
      const Vector& init = time < t ? weights_[time] : (t > 0 ? weights_[t - 1] : uniform);
      x0.segment(static_cast<Index>(s) * block, block) = init;
    }

    const detail::TemporalProblem prob(p_, std::move(blocks), cfg_.delta, std::move(anchor));
    const detail::NonnegResult r = detail::minimize_nonnegative(prob, x0, detail::inner_options(cfg_));

    weights_.push_back(r.x.tail(block));
    estimates_.emplace_back(GraphWeights(p_, weights_.back()));
    SolveReport rep;
    rep.iterations = r.iterations;
    rep.objective_trace = r.trace;
    rep.kkt_residual = r.pg_norm;
    rep.converged = r.converged && !r.diverged;
    detail::finish_report(estimates_.back(), rep, false);
    reports_.push_back(std::move(rep));
    return estimates_.back();
  }

  Index nodes() const { return p_; }
  const std::vector<LaplacianMatrix>& estimates() const { return estimates_; }
  const std::vector<SolveReport>& reports() const { return reports_; }

 private:
  Index p_;
  SolverConfig cfg_;
  detail::PairList pairs_;
  std::deque<std::pair<Vector, double>> window_;
  std::vector<Vector> weights_;
  std::vector<LaplacianMatrix> estimates_;
  std::vector<SolveReport> reports_;
};

struct TimeVaryingEstimate {
  std::vector<LaplacianMatrix> laplacians;
  std::vector<SolveReport> reports;
};

inline TimeVaryingEstimate learn_time_varying(std::span<const SimilarityMatrix> S_seq,
                                              std::span<const double> n_seq, const SolverConfig& cfg) {
  if (S_seq.empty()) throw ValidationError("learn_time_varying: empty sequence");
  if (S_seq.size() != n_seq.size())
    throw ValidationError("learn_time_varying: " + std::to_string(S_seq.size()) + " matrices but " +
                          std::to_string(n_seq.size()) + " sample counts");
  CausalGraphTracker tracker(S_seq.front().size(), cfg);
  for (std::size_t t = 0; t < S_seq.size(); ++t) tracker.push(S_seq[t].matrix(), n_seq[t]);
  return {tracker.estimates(), tracker.reports()};
}

}  // namespace lapgraph
