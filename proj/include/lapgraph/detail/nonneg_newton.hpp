#pragma once

// Minimization of a smooth convex function over the nonnegative orthant.
//
// Small problems use a two-metric projected Newton method (Bertsekas 1982):
// variables that sit near the bound with a positive gradient are treated as
// active and pushed to zero, the rest take a Newton step restricted to the
// free set, and an Armijo search runs along the projection arc. Problems with
// more than `max_newton_vars` unknowns fall back to spectral projected
// gradient (Barzilai-Borwein steps, monotone Armijo).

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

namespace lapgraph::detail {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// value() returns +inf outside the domain. hessian() fills the block
/// indexed by `free` (in that order).
template <class P>
concept NonnegProblem = requires(const P& prob, const Vector& x, Vector& g, Matrix& H,
                                 const std::vector<Index>& free) {
  { prob.size() } -> std::convertible_to<Index>;
  { prob.value(x) } -> std::convertible_to<double>;
  { prob.value_gradient(x, g) } -> std::convertible_to<double>;
  prob.hessian(x, free, H);
};

struct NonnegOptions {
  double tol = 1e-7;  // infinity norm of the projected gradient
  int max_iters = 500;
  double armijo = 1e-4;
  double active_eps = 1e-3;
  Index max_newton_vars = 2500;
  double divergence_bound = 1e12;
};

struct NonnegResult {
  Vector x;
  double value = kInf;
  double pg_norm = kInf;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> trace;
};

/// || x - max(x - g, 0) ||_inf
inline double projected_gradient_norm(const Vector& x, const Vector& g) {
  double out = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x[i] > g[i] ? g[i] : x[i];
    out = std::max(out, std::abs(v));
  }
  return out;
}

namespace nonneg_impl {

struct Step {
  Vector x;
  Vector g;
  double f = kInf;
};

// Cholesky with increasing diagonal damping until it succeeds.
inline Vector damped_newton_solve(const Matrix& H, const Vector& rhs) {
  const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  double mu = 0.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    Matrix Hd = H;
    Hd.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(Hd);
    if (llt.info() == Eigen::Success) {
      Vector d = llt.solve(rhs);
      if (d.allFinite()) return d;
    }
    mu = mu == 0.0 ? 1e-12 * scale : mu * 10.0;
  }
  return rhs / scale;
}

template <NonnegProblem P>
bool newton_step(const P& prob, const Vector& x, const Vector& g, double f, double pg,
                 const NonnegOptions& opt, Step& out) {
  const Index n = x.size();
  const double eps = std::min(opt.active_eps, pg);
  std::vector<Index> free;
  std::vector<Index> active;
  for (Index i = 0; i < n; ++i) {
    if (x[i] <= eps && g[i] > 0.0)
      active.push_back(i);
    else
      free.push_back(i);
  }
  Vector d = Vector::Zero(n);
  if (!free.empty()) {
    Matrix H;
    prob.hessian(x, free, H);
    Vector gf(static_cast<Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) gf[static_cast<Index>(k)] = g[free[k]];
    const Vector df = damped_newton_solve(H, -gf);
    for (std::size_t k = 0; k < free.size(); ++k) d[free[k]] = df[static_cast<Index>(k)];
  }
  for (Index i : active) d[i] = -x[i];

  double free_slope = 0.0;
  for (Index i : free) free_slope += g[i] * d[i];
  if (free_slope > 0.0) return false;  // not a descent direction

  double a = 1.0;
  for (int ls = 0; ls < 50; ++ls, a *= 0.5) {
    Vector xa = (x + a * d).cwiseMax(0.0);
    double predicted = -a * free_slope;
    for (Index i : active) predicted += g[i] * (x[i] - xa[i]);
    const double fa = prob.value(xa);
    if (!std::isfinite(fa)) continue;
    if (fa <= f - opt.armijo * predicted) {
      out.x = std::move(xa);
      out.f = prob.value_gradient(out.x, out.g);
      return true;
    }
    // Near the optimum the predicted decrease drops below the rounding noise
    // of f; accept the full step if it shrinks the projected gradient.
    if (ls == 0 && predicted <= 1e-12 * (1.0 + std::abs(f)) &&
        fa <= f + 1e-12 * (1.0 + std::abs(f))) {
      Vector ga;
      const double fg = prob.value_gradient(xa, ga);
      if (std::isfinite(fg) && projected_gradient_norm(xa, ga) < pg) {
        out.x = std::move(xa);
        out.g = std::move(ga);
        out.f = fg;
        return true;
      }
    }
  }
  return false;
}

template <NonnegProblem P>
bool gradient_step(const P& prob, const Vector& x, const Vector& g, double f, double step,
                   const NonnegOptions& opt, Step& out) {
  const Vector d = (x - step * g).cwiseMax(0.0) - x;
  const double slope = g.dot(d);
  if (!(slope < 0.0)) return false;
  double a = 1.0;
  for (int ls = 0; ls < 60; ++ls, a *= 0.5) {
    Vector xa = (x + a * d).cwiseMax(0.0);
    const double fa = prob.value(xa);
    if (std::isfinite(fa) && fa <= f + opt.armijo * a * slope) {
      out.x = std::move(xa);
      out.f = prob.value_gradient(out.x, out.g);
      return true;
    }
  }
  return false;
}

}  // namespace nonneg_impl

template <NonnegProblem P>
NonnegResult minimize_nonnegative(const P& prob, Vector x, const NonnegOptions& opt = {}) {
  using namespace nonneg_impl;
  NonnegResult res;
  x = x.cwiseMax(0.0);
  Vector g;
  double f = prob.value_gradient(x, g);
  if (!std::isfinite(f)) {
    res.x = std::move(x);
    return res;
  }
  const bool use_newton = prob.size() <= opt.max_newton_vars;
  double bb = 1.0 / std::max(1.0, g.cwiseAbs().maxCoeff());
  res.trace.push_back(f);

  for (int it = 0; it < opt.max_iters; ++it) {
    const double pg = projected_gradient_norm(x, g);
    res.pg_norm = pg;
    if (pg <= opt.tol) {
      res.converged = true;
      break;
    }
    if (x.cwiseAbs().maxCoeff() > opt.divergence_bound) {
      res.diverged = true;
      break;
    }
    Step next;
    bool ok = use_newton && newton_step(prob, x, g, f, pg, opt, next);
    if (!ok) ok = gradient_step(prob, x, g, f, bb, opt, next);
    if (!ok) break;
    const Vector s = next.x - x;
    const double sy = s.dot(next.g - g);
    bb = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : std::min(bb * 10.0, 1e12);
    x = std::move(next.x);
    g = std::move(next.g);
    f = next.f;
    res.iterations = it + 1;
    res.trace.push_back(f);
  }
  res.pg_norm = projected_gradient_norm(x, g);
  res.converged = res.converged || res.pg_norm <= opt.tol;
  res.x = std::move(x);
  res.value = f;
  return res;
}

}  // namespace lapgraph::detail
