#pragma once

#include <cstdint>
#include <filesystem>

#include "packann/bundle.hpp"
#include "packann/graph_builder.hpp"
#include "packann/layout_mapper.hpp"

namespace packann {

struct BuildConfig {
  BuildParams build;
  std::uint32_t pq_chunks = 0;  // 0 = auto (dim/4, reduced to a divisor of dim)
  std::uint32_t pq_iters = 12;
  std::uint32_t page_size = 4096;
  std::uint64_t seed = 0;  // graph seed; PQ training derives seed + 1
};

std::uint32_t default_pq_chunks(std::uint32_t dim);

/// Builds the graph and PQ index and writes a round-robin bundle (blocks in
/// original id order, identity mapping).
IndexBundle build_bundle(const VectorDataset& data, const std::filesystem::path& dir,
                         const BuildConfig& config);

/// Pack-merge mapping of an existing bundle into a new directory. The written
/// mapping composes with the input bundle's, so it always translates
/// original-dataset ids to the new bundle's ids.
IndexBundle map_bundle(const IndexBundle& input, const std::filesystem::path& dir,
                       PackOrder order = PackOrder::kPqDistance);

/// Generates and stores entry vertex candidates inside the bundle directory.
/// search_width == 0 uses the bundle's recorded build width.
void add_entries(IndexBundle& bundle, std::uint32_t n_cluster, std::uint32_t batch_size,
                 std::uint32_t iters, std::uint64_t seed, std::uint32_t search_width = 0);

}  // namespace packann
