#pragma once

// Seeded planted-truth inputs shared by the unit tests and the acceptance run.

#include <cstdint>
#include <vector>

#include "lapgraph/preprocess.hpp"
#include "lapgraph/synth.hpp"

namespace fixture {

using namespace lapgraph;

/// k groups with complete intra-group support.
inline PlantedGraph complete_groups(Index p, int k, std::uint64_t seed) {
  return random_k_component_graph(p, k, {0.5, 1.5}, seed, 1.0);
}

/// Correlation of n draws from the planted model with unit-scale component
/// levels.
inline Matrix component_correlation(const PlantedGraph& g, Index n, std::uint64_t seed) {
  const ReturnsPanel X = sample_gmrf_with_levels(g.laplacian, n, seed, 1.0);
  return similarity(X, SimilarityKind::correlation).matrix();
}

/// T window correlations of `rows` draws each: the first half from one
/// connected planted graph, the second half from another.
inline std::vector<SimilarityMatrix> regime_switching_sequence(Index p, Index T, Index rows, std::uint64_t seed) {
  const PlantedGraph a = random_k_component_graph(p, 1, {0.5, 1.5}, seed, 0.3);
  const PlantedGraph b = random_k_component_graph(p, 1, {0.5, 1.5}, seed + 1000, 0.3);
  std::vector<SimilarityMatrix> out;
  for (Index t = 0; t < T; ++t) {
    const PlantedGraph& g = t < T / 2 ? a : b;
    const ReturnsPanel X = sample_gmrf(g.laplacian, rows, seed * 7919 + static_cast<std::uint64_t>(t));
    out.push_back(similarity(X, SimilarityKind::correlation));
  }
  return out;
}

}  // namespace fixture
