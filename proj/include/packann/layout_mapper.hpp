#pragma once

#include <cstdint>
#include <vector>

#include "packann/core.hpp"
#include "packann/quantization.hpp"

namespace packann {

/// Ordering used when ranking a vertex's neighbors during packing. The
/// default scores each neighbor's PQ code against an ADC table built from
/// the center vertex's full vector; exact ordering exists for ablation.
enum class PackOrder { kPqDistance, kExactDistance };

struct PackResult {
  // Temporary layout; slots hold ORIGINAL vertex ids. Temp ids are implied
  // by position: slot s of page p is temp id p*b + s.
  Layout layout;
  std::vector<VertexId> f_inj;  // original id -> temp id
};

/// Star packing: scan vertices in ascending id order; each unvisited vertex
/// opens a page and pulls in its unvisited neighbors in ascending distance
/// order (ties to the lower id) until the page holds b blocks. Every original
/// id lands in exactly one page.
PackResult pack(const GraphIndex& graph, const VectorDataset& data,
                const PQCodebook& codebook, const PQCodes& codes, std::uint32_t b,
                PackOrder order = PackOrder::kPqDistance);

struct MergeResult {
  // Final layout: dense final ids, every page full except possibly the last.
  Layout layout;
  std::vector<VertexId> f_surj;  // temp id -> final id, kPadId on pad slots
};

/// First-fit-decreasing combination of under-full pages, then a tail
/// compaction so that every final page except the last is full (groups in the
/// non-full FFD tail may be split across a page boundary; full FFD bins are
/// never split). Final ids are assigned page-contiguously.
MergeResult merge(const Layout& temp, std::uint32_t b);

/// First-fit-decreasing bin packing of `sizes` into bins of capacity `b`.
/// Returns the item indices per bin in placement order. Exposed so the merge
/// heuristic can be checked against an optimal bin-packing oracle directly.
std::vector<std::vector<std::size_t>> ffd_bins(const std::vector<std::uint32_t>& sizes,
                                               std::uint32_t b);

/// Composes the two stage maps into a checked bijection with its inverse.
/// Throws std::runtime_error when the composition is not a bijection on
/// {0..N-1} (which would mean a pack or merge bug).
IdMapping compose_mapping(const std::vector<VertexId>& f_inj,
                          const std::vector<VertexId>& f_surj);

/// Relabels the adjacency structure: edge (u, v) becomes
/// (forward[u], forward[v]); neighbor list order is preserved.
GraphIndex remap_graph(const GraphIndex& graph, const IdMapping& mapping);

/// Blocks in final-id order: block j carries the original vector of
/// inverse[j] and that vertex's neighbor list mapped through forward.
std::vector<DataBlock> remap_blocks(const GraphIndex& graph, const VectorDataset& data,
                                    const IdMapping& mapping, const Layout& final_layout);

/// Identity mapping on n ids (the round-robin layout's mapping).
IdMapping identity_mapping(std::size_t n);

}  // namespace packann
