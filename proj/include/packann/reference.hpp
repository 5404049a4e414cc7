#pragma once

#include <vector>

#include "packann/compactness.hpp"
#include "packann/core.hpp"

// Serial reference implementations of the parallel kernels. They must stay
// independent of the optimized paths: tests use them as oracles and the
// kernel benchmark compares against them.

namespace packann::reference {

/// Plain O(N^2) medoid with the same accumulation order as the parallel
/// kernel, so results (and float sums) match exactly.
VertexId compute_medoid_serial(const VectorDataset& data);

/// Independently coded quadratic scan: materializes every distance and sorts,
/// instead of keeping a bounded heap.
std::vector<std::vector<VertexId>> ground_truth_serial(const VectorDataset& data,
                                                       const VectorDataset& queries,
                                                       std::uint32_t k);

/// Serial per-page loop over the same per-page spectral computation.
PageCompactnessReport layout_report_serial(const GraphIndex& graph, const Layout& layout);

}  // namespace packann::reference
