#pragma once

// Laplacian / edge-weight algebra and the spectral utilities every solver
// shares. Edge weights are stored as a vector over unordered pairs (i, j),
// i < j, in row-major order: (0,1), (0,2), ..., (0,p-1), (1,2), ...

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lapgraph/errors.hpp"

namespace lapgraph {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr Index num_pairs(Index p) { return p * (p - 1) / 2; }

/// Position of the pair (i, j), i < j, in the row-major pair order.
inline constexpr Index pair_index(Index i, Index j, Index p) {
  return i * p - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of pair_index.
inline std::pair<Index, Index> pair_nodes(Index m, Index p) {
  Index i = 0;
  Index row = p - 1;
  while (m >= row) {
    m -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + m};
}

/// All pairs in row-major order.
inline std::vector<std::pair<Index, Index>> all_pairs(Index p) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(num_pairs(p)));
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) out.emplace_back(i, j);
  return out;
}

/// Nonnegative weights of the p(p-1)/2 node pairs.
class GraphWeights {
 public:
  GraphWeights(Index p, Vector w) : p_(p), w_(std::move(w)) {
    if (p_ < 2) throw ValidationError("GraphWeights: need at least 2 nodes");
    if (w_.size() != num_pairs(p_))
      throw ValidationError("GraphWeights: expected " + std::to_string(num_pairs(p_)) +
                            " weights for p=" + std::to_string(p_) + ", got " +
                            std::to_string(w_.size()));
    for (Index m = 0; m < w_.size(); ++m) {
      if (!std::isfinite(w_[m]) || w_[m] < 0.0)
        throw ValidationError("GraphWeights: weight " + std::to_string(m) +
                              " is negative or not finite");
    }
  }

  static GraphWeights zeros(Index p) { return {p, Vector::Zero(num_pairs(p))}; }
  static GraphWeights uniform(Index p, double value) {
    return {p, Vector::Constant(num_pairs(p), value)};
  }

  Index nodes() const { return p_; }
  const Vector& values() const { return w_; }
  double operator()(Index i, Index j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return w_[pair_index(i, j, p_)];
  }

  /// Weighted degree of every node.
  Vector degrees() const {
    Vector d = Vector::Zero(p_);
    Index m = 0;
    for (Index i = 0; i < p_; ++i)
      for (Index j = i + 1; j < p_; ++j, ++m) {
        d[i] += w_[m];
        d[j] += w_[m];
      }
    return d;
  }

 private:
  Index p_;
  Vector w_;
};

/// Combinatorial Laplacian D - W. Only constructible from weights, so the
/// structural invariants (symmetry, zero row sums, sign pattern) hold by
/// construction.
class LaplacianMatrix {
 public:
  explicit LaplacianMatrix(const GraphWeights& w) : L_(Matrix::Zero(w.nodes(), w.nodes())) {
    const Index p = w.nodes();
    const Vector& v = w.values();
    Index m = 0;
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j, ++m) {
        L_(i, j) = -v[m];
        L_(j, i) = -v[m];
      }
    // Diagonal accumulates in column order so that diag == -(sum of the row's
    // off-diagonals) holds bit-exactly when summed the same way.
    for (Index i = 0; i < p; ++i) {
      double d = 0.0;
      for (Index j = 0; j < p; ++j)
        if (j != i) d += -L_(i, j);
      L_(i, i) = d;
    }
  }

  Index nodes() const { return L_.rows(); }
  const Matrix& matrix() const { return L_; }
  double operator()(Index i, Index j) const { return L_(i, j); }

  GraphWeights weights() const {
    const Index p = nodes();
    Vector w(num_pairs(p));
    Index m = 0;
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j, ++m) w[m] = std::max(0.0, -L_(i, j));
    return {p, std::move(w)};
  }

  Vector degrees() const { return L_.diagonal(); }

  bool operator==(const LaplacianMatrix& other) const {
    return L_.rows() == other.L_.rows() && L_ == other.L_;
  }

 private:
  Matrix L_;
};

inline LaplacianMatrix laplacian_from_weights(const GraphWeights& w) { return LaplacianMatrix(w); }

/// Reads weights off a dense Laplacian-like matrix. Off-diagonals are
/// negated; positive off-diagonal round-off up to 1e-12 (relative) is
/// clamped to zero.
inline GraphWeights weights_from_laplacian(const Matrix& L) {
  if (L.rows() != L.cols() || L.rows() < 2)
    throw ValidationError("weights_from_laplacian: expected a square matrix with p >= 2");
  if (!L.allFinite()) throw ValidationError("weights_from_laplacian: non-finite entries");
  const Index p = L.rows();
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  constexpr double kStructTol = 1e-6;
  constexpr double kSignTol = 1e-12;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      if (std::abs(L(i, j) - L(j, i)) > kStructTol * scale)
        throw ValidationError("weights_from_laplacian: matrix is not symmetric at (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
      if (L(i, j) > kSignTol * scale)
        throw ValidationError("weights_from_laplacian: positive off-diagonal at (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (std::abs(L.row(i).sum()) > kStructTol * scale)
      throw ValidationError("weights_from_laplacian: row " + std::to_string(i) +
                            " does not sum to zero");
  }
  Vector w(num_pairs(p));
  Index m = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j, ++m) w[m] = std::max(0.0, -0.5 * (L(i, j) + L(j, i)));
  return {p, std::move(w)};
}

/// Canonicalizes a dense matrix into a LaplacianMatrix (validating it).
inline LaplacianMatrix laplacian_from_dense(const Matrix& L) {
  return LaplacianMatrix(weights_from_laplacian(L));
}

// ---------------------------------------------------------------------------
// Spectral utilities. All of them use Eigen's self-adjoint solver and the same
// zero-eigenvalue tolerance rule.

struct EigenDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns match eigenvalues
};

inline EigenDecomposition symmetric_eigen(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric_eigen: eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Default zero tolerance: 1e-8 * max(1, largest eigenvalue).
inline double default_zero_tol(const Vector& ascending_eigenvalues) {
  const double top = ascending_eigenvalues.size() ? ascending_eigenvalues[ascending_eigenvalues.size() - 1] : 0.0;
  return 1e-8 * std::max(1.0, top);
}

struct SpectralSummary {
  Vector eigenvalues;  // ascending
  int nullity = 0;
  double algebraic_connectivity = 0.0;
  double spectral_radius = 0.0;
  double zero_tol = 0.0;
};

inline SpectralSummary summarize_eigenvalues(const Vector& eigenvalues, std::optional<double> zero_tol) {
  SpectralSummary s;
  s.eigenvalues = eigenvalues;
  s.zero_tol = zero_tol ? *zero_tol : default_zero_tol(eigenvalues);
  for (Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] <= s.zero_tol) ++s.nullity;
  s.algebraic_connectivity = eigenvalues.size() > 1 ? eigenvalues[1] : 0.0;
  s.spectral_radius = eigenvalues.size() ? eigenvalues[eigenvalues.size() - 1] : 0.0;
  return s;
}

inline SpectralSummary spectral_summary(const LaplacianMatrix& L, std::optional<double> zero_tol = std::nullopt) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(L.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_summary: eigendecomposition failed");
  return summarize_eigenvalues(solver.eigenvalues(), zero_tol);
}

inline int num_components(const LaplacianMatrix& L, std::optional<double> zero_tol = std::nullopt) {
  return spectral_summary(L, zero_tol).nullity;
}

/// Log pseudo-determinant: sum of log of the eigenvalues above the zero
/// tolerance. Throws DisconnectedGraphError when the nullity exceeds one.
inline double log_gdet(const LaplacianMatrix& L, std::optional<double> zero_tol = std::nullopt) {
  const SpectralSummary s = spectral_summary(L, zero_tol);
  if (s.nullity > 1)
    throw DisconnectedGraphError("log_gdet: graph has " + std::to_string(s.nullity) + " components",
                                 s.nullity);
  double acc = 0.0;
  for (Index i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > s.zero_tol) acc += std::log(s.eigenvalues[i]);
  return acc;
}

/// log det(L + P) by Cholesky, where P is a PSD matrix covering the nullspace
/// of L (J = 11^T/p for connected graphs). Returns nullopt when L + P is not
/// positive definite.
inline std::optional<double> log_det_shifted(const Matrix& L, const Matrix& P) {
  Eigen::LLT<Matrix> llt(L + P);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto& diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) return std::nullopt;
    acc += std::log(diag[i]);
  }
  return 2.0 * acc;
}

inline Matrix ones_projector(Index p) { return Matrix::Constant(p, p, 1.0 / static_cast<double>(p)); }

/// Squared Frobenius distance between two Laplacians.
inline double time_consistency(const LaplacianMatrix& a, const LaplacianMatrix& b) {
  if (a.nodes() != b.nodes())
    throw ValidationError("time_consistency: dimension mismatch (" + std::to_string(a.nodes()) +
                          " vs " + std::to_string(b.nodes()) + ")");
  return (a.matrix() - b.matrix()).squaredNorm();
}

// ---------------------------------------------------------------------------
// Structural checks used by solvers' reports and by tests.

struct InvariantReport {
  double max_asymmetry = 0.0;
  double max_row_sum = 0.0;
  double max_positive_offdiag = 0.0;  // largest L_ij > 0, i != j (0 if none)
  double min_eigenvalue = 0.0;
  double max_degree_deviation = 0.0;  // |L_ii - 1|, meaningful for unit-degree graphs
};

inline InvariantReport check_invariants(const Matrix& L) {
  InvariantReport r;
  const Index p = L.rows();
  for (Index i = 0; i < p; ++i) {
    r.max_row_sum = std::max(r.max_row_sum, std::abs(L.row(i).sum()));
    r.max_degree_deviation = std::max(r.max_degree_deviation, std::abs(L(i, i) - 1.0));
    for (Index j = 0; j < p; ++j) {
      if (i == j) continue;
      r.max_asymmetry = std::max(r.max_asymmetry, std::abs(L(i, j) - L(j, i)));
      r.max_positive_offdiag = std::max(r.max_positive_offdiag, L(i, j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(L, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = solver.eigenvalues()[0];
  return r;
}

inline InvariantReport check_invariants(const LaplacianMatrix& L) { return check_invariants(L.matrix()); }

/// Connected components of the graph restricted to edges with weight > threshold.
/// Returns a component label per node, labels numbered by first appearance.
inline std::vector<int> component_labels(const GraphWeights& w, double threshold = 0.0) {
  const Index p = w.nodes();
  std::vector<Index> parent(p);
  for (Index i = 0; i < p; ++i) parent[i] = i;
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Index m = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j, ++m)
      if (w.values()[m] > threshold) parent[find(i)] = find(j);
  std::vector<int> label(p, -1);
  std::vector<int> root_label(p, -1);
  int next = 0;
  for (Index i = 0; i < p; ++i) {
    const Index r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace lapgraph
