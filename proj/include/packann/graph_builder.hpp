#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "packann/core.hpp"

namespace packann {

struct BuildParams {
  std::uint32_t max_degree = 32;    // R
  std::uint32_t build_width = 500;  // candidate list size L during build
  float alpha1 = 1.0f;              // first-pass pruning slack
  float alpha2 = 1.2f;              // second-pass pruning slack

  void check_valid() const;
};

/// Exact medoid: the vertex minimizing the sum of unsquared distances to all
/// others, ties to the lowest id. Parallel over vertices; each per-vertex sum
/// is accumulated serially so the result is independent of thread count.
/// threads == 0 uses the OpenMP default.
VertexId compute_medoid(const VectorDataset& data, int threads = 0);

struct GreedySearchResult {
  // Closest-first (distance, id) candidates, at most `width` entries.
  std::vector<std::pair<float, VertexId>> candidates;
  // Every vertex that was expanded, in expansion order.
  std::vector<VertexId> visited;
};

/// Best-first graph search at full precision: maintains the `width` closest
/// candidates seen so far and repeatedly expands the closest unexpanded one
/// until no candidate in the list is unexpanded.
GreedySearchResult greedy_build_search(const GraphIndex& graph, const VectorDataset& data,
                                       VertexId start, std::span<const float> query,
                                       std::uint32_t width);

/// Alpha-relaxed pruning: repeatedly keep the nearest remaining candidate p
/// and drop every q with alpha * d(p, q) <= d(v, q); stops at max_degree
/// survivors. Candidates carry their distance to v; v itself must not appear.
std::vector<VertexId> robust_prune(std::vector<std::pair<float, VertexId>> candidates,
                                   VertexId v, const VectorDataset& data, float alpha,
                                   std::uint32_t max_degree);

/// Two-pass incremental construction (alpha1 then alpha2) over a seeded
/// random initial graph, with reverse-edge insertion and re-pruning on
/// overflow. Afterwards every vertex is made reachable from the medoid.
/// Deterministic for a given seed.
GraphIndex build_vamana(const VectorDataset& data, const BuildParams& params,
                        std::uint64_t seed);

/// Vertices not reachable from `start` by directed BFS (ascending id order).
std::vector<VertexId> unreachable_from(const GraphIndex& graph, VertexId start);

}  // namespace packann
