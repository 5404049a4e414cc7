#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "packann/core.hpp"
#include "packann/graph_builder.hpp"

namespace packann {

/// Entry vertex candidates kept in memory for the online per-query scan:
/// one representative vertex per cluster plus the medoid, full vectors
/// alongside so selection needs no index access.
struct EntryCandidates {
  std::vector<VertexId> ids;
  std::vector<float> vectors;  // ids.size() * dim, same order as ids
  std::uint32_t dim = 0;
  std::uint32_t n_cluster = 0;
  VertexId medoid = 0;

  std::size_t size() const { return ids.size(); }
  std::span<const float> vec(std::size_t i) const {
    return {vectors.data() + i * dim, dim};
  }

  void save(const std::string& path) const;
  static EntryCandidates load(const std::string& path);
};

/// Mini-batch k-means with per-center learning rate 1/assignment-count.
/// Returns n_cluster centroids (row-major), deterministic for a given seed.
std::vector<float> minibatch_kmeans(const VectorDataset& data, std::uint32_t n_cluster,
                                    std::uint32_t batch_size, std::uint32_t iters,
                                    std::uint64_t seed);

/// Runs a top-1 graph search from the medoid for each centroid, deduplicates
/// the hits keeping first occurrences, and appends the medoid when absent.
EntryCandidates gen_entry_candidates(const GraphIndex& graph, const VectorDataset& data,
                                     std::span<const float> centroids,
                                     std::uint32_t n_cluster, VertexId medoid,
                                     std::uint32_t search_width);

/// Linear scan for the candidate nearest to the query (exact distance, ties
/// to the lower vertex id). Costs exactly size() distance evaluations, which
/// are added to *distance_evals when provided.
VertexId select_entry(const EntryCandidates& candidates, std::span<const float> query,
                      std::uint64_t* distance_evals = nullptr);

}  // namespace packann
