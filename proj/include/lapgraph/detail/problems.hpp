#pragma once

// Objective functions over pair weights, shaped for minimize_nonnegative.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "lapgraph/detail/nonneg_newton.hpp"
#include "lapgraph/detail/pair_ops.hpp"

namespace lapgraph::detail {

/// Inverse of L(w) + P, or nullopt when that matrix is not positive definite.
struct ShiftedFactor {
  Matrix inverse;
  double log_det = 0.0;
};

inline std::optional<ShiftedFactor> factor_shifted(const Matrix& L, const Matrix& P, bool want_inverse) {
  Eigen::LLT<Matrix> llt(L + P);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto& diag = llt.matrixLLT().diagonal();
  ShiftedFactor out;
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) return std::nullopt;
    out.log_det += 2.0 * std::log(diag[i]);
  }
  if (want_inverse) out.inverse = llt.solve(Matrix::Identity(L.rows(), L.cols()));
  return out;
}

/// scale * ( <c, w> - log det(L(w) + P) )
///
/// With P the orthogonal projector onto the nullspace that the support leaves
/// (11^T/p for a connected support), log det(L + P) is the log
/// pseudo-determinant of L.
class LogdetProblem {
 public:
  LogdetProblem(Index p, PairList pairs, Vector c, Matrix P, double scale = 1.0)
      : p_(p), pairs_(std::move(pairs)), c_(std::move(c)), P_(std::move(P)), scale_(scale) {}

  Index size() const { return static_cast<Index>(pairs_.size()); }
  Index nodes() const { return p_; }
  const PairList& pairs() const { return pairs_; }
  const Vector& linear() const { return c_; }

  double value(const Vector& w) const {
    const auto fac = factor_shifted(laplacian_dense(p_, pairs_, w), P_, false);
    if (!fac) return kInf;
    return scale_ * (c_.dot(w) - fac->log_det);
  }

  double value_gradient(const Vector& w, Vector& g) const {
    const auto fac = factor_shifted(laplacian_dense(p_, pairs_, w), P_, true);
    if (!fac) {
      g = Vector::Zero(size());
      return kInf;
    }
    g = scale_ * (c_ - laplacian_adjoint(fac->inverse, pairs_));
    return scale_ * (c_.dot(w) - fac->log_det);
  }

  /// H_ef = scale * (a_e^T M a_f)^2 with a_e = e_i - e_j, M = (L + P)^-1.
  void hessian(const Vector& w, const std::vector<Index>& free, Matrix& H) const {
    const auto fac = factor_shifted(laplacian_dense(p_, pairs_, w), P_, true);
    const Index n = static_cast<Index>(free.size());
    H.setZero(n, n);
    if (!fac) return;
    const Matrix& M = fac->inverse;
    for (Index a = 0; a < n; ++a) {
      const auto [i, j] = pairs_[free[a]];
      for (Index b = a; b < n; ++b) {
        const auto [k, l] = pairs_[free[b]];
        const double v = M(i, k) - M(i, l) - M(j, k) + M(j, l);
        H(a, b) = H(b, a) = scale_ * v * v;
      }
    }
  }

 private:
  Index p_;
  PairList pairs_;
  Vector c_;
  Matrix P_;
  double scale_;
};

/// base(w) + <y, D w - b> + (rho/2) ||D w - b||^2 where D maps pair weights
/// to node degrees.
template <NonnegProblem Base>
class AugmentedDegreeProblem {
 public:
  AugmentedDegreeProblem(const Base& base, Vector target, Vector y, double rho)
      : base_(base), b_(std::move(target)), y_(std::move(y)), rho_(rho) {}

  Index size() const { return base_.size(); }

  Vector residual(const Vector& w) const { return degrees(b_.size(), base_.pairs(), w) - b_; }

  double value(const Vector& w) const {
    const double f = base_.value(w);
    if (!std::isfinite(f)) return kInf;
    const Vector r = residual(w);
    return f + y_.dot(r) + 0.5 * rho_ * r.squaredNorm();
  }

  double value_gradient(const Vector& w, Vector& g) const {
    const double f = base_.value_gradient(w, g);
    if (!std::isfinite(f)) return kInf;
    const Vector r = residual(w);
    g += degree_adjoint(y_ + rho_ * r, base_.pairs());
    return f + y_.dot(r) + 0.5 * rho_ * r.squaredNorm();
  }

  void hessian(const Vector& w, const std::vector<Index>& free, Matrix& H) const {
    base_.hessian(w, free, H);
    const auto& pairs = base_.pairs();
    const Index n = static_cast<Index>(free.size());
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        H(a, b) += rho_ * shared_endpoints(pairs[free[a]],
                                           pairs[free[b]]);
  }

 private:
  const Base& base_;
  Vector b_;
  Vector y_;
  double rho_;
};

/// <z, w> - alpha * sum_i log(deg_i) + gamma * ||w||^2 over all pairs. This is
/// (1/2) tr(W Z) - alpha 1^T log(W 1) + (gamma/2) ||W||_F^2 written in the
/// upper-triangular weights.
class SmoothGraphProblem {
 public:
  SmoothGraphProblem(Index p, Vector z, double alpha, double gamma)
      : p_(p), pairs_(all_pairs(p)), z_(std::move(z)), alpha_(alpha), gamma_(gamma) {}

  Index size() const { return static_cast<Index>(pairs_.size()); }
  const PairList& pairs() const { return pairs_; }

  double value(const Vector& w) const {
    const Vector d = degrees(p_, pairs_, w);
    if ((d.array() <= 0.0).any()) return kInf;
    return z_.dot(w) - alpha_ * d.array().log().sum() + gamma_ * w.squaredNorm();
  }

  double value_gradient(const Vector& w, Vector& g) const {
    const Vector d = degrees(p_, pairs_, w);
    if ((d.array() <= 0.0).any()) {
      g = Vector::Zero(size());
      return kInf;
    }
    const Vector inv = d.cwiseInverse();
    g = z_ - alpha_ * degree_adjoint(inv, pairs_) + 2.0 * gamma_ * w;
    return z_.dot(w) - alpha_ * d.array().log().sum() + gamma_ * w.squaredNorm();
  }

  void hessian(const Vector& w, const std::vector<Index>& free, Matrix& H) const {
    const Vector d = degrees(p_, pairs_, w);
    const Index n = static_cast<Index>(free.size());
    H.setZero(n, n);
    for (Index a = 0; a < n; ++a) {
      const auto& e = pairs_[free[a]];
      for (Index b = 0; b < n; ++b) {
        const auto& f = pairs_[free[b]];
        double v = 0.0;
        for (Index node : {e.first, e.second})
          if (node == f.first || node == f.second) v += 1.0 / (d[node] * d[node]);
        H(a, b) = alpha_ * v;
      }
      H(a, a) += 2.0 * gamma_;
    }
  }

 private:
  Index p_;
  PairList pairs_;
  Vector z_;
  double alpha_;
  double gamma_;
};

/// Joint objective over a run of consecutive windows s = 0..m-1:
///   sum_s n_s (<c_s, w_s> - log det(L(w_s) + J)) + delta * sum_s ||L(w_s - w_{s-1})||_F^2
/// where w_{-1} is an optional fixed anchor (an earlier causal estimate).
class TemporalProblem {
 public:
  TemporalProblem(Index p, std::vector<LogdetProblem> blocks, double delta, std::optional<Vector> anchor)
      : p_(p), blocks_(std::move(blocks)), delta_(delta), anchor_(std::move(anchor)),
        block_size_(num_pairs(p)), pairs_(all_pairs(p)) {}

  Index size() const { return block_size_ * static_cast<Index>(blocks_.size()); }
  Index block_size() const { return block_size_; }

  double value(const Vector& x) const {
    double f = 0.0;
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const double v = blocks_[s].value(block(x, s));
      if (!std::isfinite(v)) return kInf;
      f += v;
    }
    return f + coupling(x);
  }

  double value_gradient(const Vector& x, Vector& g) const {
    g = Vector::Zero(size());
    double f = 0.0;
    Vector gb;
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const double v = blocks_[s].value_gradient(block(x, s), gb);
      if (!std::isfinite(v)) return kInf;
      f += v;
      g.segment(offset(s), block_size_) = gb;
    }
    if (delta_ > 0.0) {
      for (std::size_t s = 0; s < blocks_.size(); ++s) {
        const auto u = link(x, s);
        if (!u) continue;
        const Vector gu = delta_ * laplacian_frobenius_sq_grad(p_, pairs_, *u);
        g.segment(offset(s), block_size_) += gu;
        if (s > 0) g.segment(offset(s - 1), block_size_) -= gu;
      }
    }
    return f + coupling(x);
  }

  void hessian(const Vector& x, const std::vector<Index>& free, Matrix& H) const {
    const Index n = static_cast<Index>(free.size());
    H.setZero(n, n);
    // Split the free set by block.
    std::vector<std::vector<Index>> local(blocks_.size());
    std::vector<std::vector<Index>> position(blocks_.size());
    for (Index a = 0; a < n; ++a) {
      const Index v = free[a];
      const auto s = static_cast<std::size_t>(v / block_size_);
      local[s].push_back(v % block_size_);
      position[s].push_back(a);
    }
    Matrix Hb;
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      if (local[s].empty()) continue;
      blocks_[s].hessian(block(x, s), local[s], Hb);
      for (std::size_t a = 0; a < local[s].size(); ++a)
        for (std::size_t b = 0; b < local[s].size(); ++b)
          H(position[s][a], position[s][b]) = Hb(static_cast<Index>(a), static_cast<Index>(b));
    }
    if (delta_ <= 0.0) return;
    // Coupling: 2 delta Q on each diagonal block once per link touching it,
    // -2 delta Q between neighbours. Q_ef = shared(e,f) + 2 [e == f].
    auto q = [&](Index e, Index f) {
      return static_cast<double>(shared_endpoints(pairs_[e], pairs_[f])) +
             (e == f ? 2.0 : 0.0);
    };
    for (Index a = 0; a < n; ++a) {
      const Index va = free[a];
      const Index sa = va / block_size_;
      const Index ea = va % block_size_;
      for (Index b = 0; b < n; ++b) {
        const Index vb = free[b];
        const Index sb = vb / block_size_;
        const Index eb = vb % block_size_;
        if (sa == sb) {
          const double links = links_touching(static_cast<std::size_t>(sa));
          H(a, b) += 2.0 * delta_ * links * q(ea, eb);
        } else if (std::abs(sa - sb) == 1) {
          H(a, b) -= 2.0 * delta_ * q(ea, eb);
        }
      }
    }
  }

 private:
  Index offset(std::size_t s) const { return static_cast<Index>(s) * block_size_; }
  Vector block(const Vector& x, std::size_t s) const { return x.segment(offset(s), block_size_); }

  // w_s - w_{s-1}, or nothing when block s has no predecessor.
  std::optional<Vector> link(const Vector& x, std::size_t s) const {
    if (s == 0) {
      if (!anchor_) return std::nullopt;
      return Vector(block(x, 0) - *anchor_);
    }
    return Vector(block(x, s) - block(x, s - 1));
  }

  double links_touching(std::size_t s) const {
    double n = 0.0;
    if (s > 0 || anchor_) n += 1.0;
    if (s + 1 < blocks_.size()) n += 1.0;
    return n;
  }

  double coupling(const Vector& x) const {
    if (delta_ <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 0; s < blocks_.size(); ++s)
      if (const auto u = link(x, s)) acc += laplacian_frobenius_sq(p_, pairs_, *u);
    return delta_ * acc;
  }

  Index p_;
  std::vector<LogdetProblem> blocks_;
  double delta_;
  std::optional<Vector> anchor_;
  Index block_size_;
  PairList pairs_;
};

}  // namespace lapgraph::detail
