#pragma once

// Linear maps between pair-weight vectors and p x p matrices, for an
// arbitrary support (subset of node pairs).

#include <utility>
#include <vector>

#include "lapgraph/graphcore.hpp"

namespace lapgraph::detail {

using PairList = std::vector<std::pair<Index, Index>>;

/// Adjoint of the Laplacian map: out_e = M_ii + M_jj - M_ij - M_ji, so that
/// tr(L(w) M) = <w, out>.
inline Vector laplacian_adjoint(const Matrix& M, const PairList& pairs) {
  Vector out(static_cast<Index>(pairs.size()));
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [i, j] = pairs[e];
    out[static_cast<Index>(e)] = M(i, i) + M(j, j) - M(i, j) - M(j, i);
  }
  return out;
}

inline Matrix laplacian_dense(Index p, const PairList& pairs, const Vector& w) {
  Matrix L = Matrix::Zero(p, p);
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [i, j] = pairs[e];
    const double v = w[static_cast<Index>(e)];
    L(i, j) -= v;
    L(j, i) -= v;
    L(i, i) += v;
    L(j, j) += v;
  }
  return L;
}

inline Vector degrees(Index p, const PairList& pairs, const Vector& w) {
  Vector d = Vector::Zero(p);
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    d[pairs[e].first] += w[static_cast<Index>(e)];
    d[pairs[e].second] += w[static_cast<Index>(e)];
  }
  return d;
}

/// Adjoint of the degree map: out_e = y_i + y_j.
inline Vector degree_adjoint(const Vector& y, const PairList& pairs) {
  Vector out(static_cast<Index>(pairs.size()));
  for (std::size_t e = 0; e < pairs.size(); ++e)
    out[static_cast<Index>(e)] = y[pairs[e].first] + y[pairs[e].second];
  return out;
}

/// Number of endpoints two pairs share (0, 1 or 2). Entry (e,f) of D^T D.
inline int shared_endpoints(const std::pair<Index, Index>& a, const std::pair<Index, Index>& b) {
  return (a.first == b.first) + (a.first == b.second) + (a.second == b.first) + (a.second == b.second);
}

/// ||L(u)||_F^2 = sum of squared degrees + 2 ||u||^2.
inline double laplacian_frobenius_sq(Index p, const PairList& pairs, const Vector& u) {
  return degrees(p, pairs, u).squaredNorm() + 2.0 * u.squaredNorm();
}

/// Gradient of laplacian_frobenius_sq: 2 (D^T D + 2 I) u.
inline Vector laplacian_frobenius_sq_grad(Index p, const PairList& pairs, const Vector& u) {
  return 2.0 * (degree_adjoint(degrees(p, pairs, u), pairs) + 2.0 * u);
}

}  // namespace lapgraph::detail
