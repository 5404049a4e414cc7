#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "packann/core.hpp"

namespace packann {

/// Small undirected graph on locally re-labeled vertices 0..n-1.
struct SmallGraph {
  std::uint32_t n = 0;
  std::vector<std::vector<std::uint32_t>> adj;

  std::size_t edge_count() const;
};

/// Diameter sentinel for disconnected graphs.
inline constexpr int kInfiniteDiameter = -1;

/// Undirected induced subgraph of `ids`: {u, v} is an edge iff either
/// directed edge exists in `graph`. Local vertex i corresponds to ids[i].
SmallGraph induced_subgraph(const GraphIndex& graph, std::span<const VertexId> ids);

/// Longest shortest path via all-pairs BFS; 0 for a single vertex,
/// kInfiniteDiameter when disconnected.
int diameter(const SmallGraph& g);

/// Dense Laplacian, row-major n*n: deg on the diagonal, -1 on adjacency.
std::vector<double> laplacian(const SmallGraph& g);

/// Eigenvalues of a dense symmetric matrix (row-major n*n) in ascending
/// order, via cyclic Jacobi rotations to 1e-10 off-diagonal norm.
std::vector<double> symmetric_eigenvalues(std::vector<double> m, std::uint32_t n);

/// Second-smallest Laplacian eigenvalue; values below 1e-9 collapse to an
/// exact 0 so that lambda2 == 0 coincides with disconnection. Throws
/// std::invalid_argument when the matrix is not symmetric.
double algebraic_connectivity(const std::vector<double>& lap, std::uint32_t n);

/// lambda2 / diameter over the undirected induced subgraph of the page's
/// valid vertices; 0 for disconnected pages and for single-vertex pages.
double page_compactness(const GraphIndex& graph, std::span<const VertexId> valid_ids);

struct PageReport {
  std::uint32_t page_index = 0;
  std::uint32_t valid_count = 0;
  int diameter = 0;  // kInfiniteDiameter when disconnected
  double lambda2 = 0.0;
  double gamma = 0.0;
};

struct PageCompactnessReport {
  std::vector<PageReport> per_page;
  // Means exclude single-vertex pages; disconnected pages contribute 0.
  double mean_gamma = 0.0;
  // Mean over connected multi-vertex pages only.
  double mean_gamma_connected = 0.0;
  // Fraction of multi-vertex pages whose induced subgraph is disconnected.
  double fraction_disconnected = 0.0;
  // Fraction of connected multi-vertex pages with gamma strictly above 0.5.
  double fraction_gamma_above_half = 0.0;
};

/// Per-page compactness over the whole layout, parallel across pages.
/// Page slots must be ids in `graph`'s id space; PAD slots are ignored.
/// threads == 0 uses the OpenMP default.
PageCompactnessReport layout_report(const GraphIndex& graph, const Layout& layout,
                                    int threads = 0);

/// CSV rows: page_index,valid_count,diameter,lambda2,gamma ("inf" diameter
/// for disconnected pages). Byte-stable for identical inputs.
std::string report_csv(const PageCompactnessReport& report);

/// Versioned JSON summary (schema 1) with the aggregate fields above.
std::string report_summary_json(const PageCompactnessReport& report);

}  // namespace packann
