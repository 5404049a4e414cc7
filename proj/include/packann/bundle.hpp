#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "packann/core.hpp"
#include "packann/entry_selector.hpp"
#include "packann/quantization.hpp"
#include "packann/storage.hpp"

namespace packann {

/// One searchable index directory:
///   meta.json     geometry, layout kind, medoid, build provenance
///   pages.bin     the page-aligned index file
///   graph.bin     adjacency in the bundle's id space (offline tooling)
///   codebook.bin  PQ codebook
///   codes.bin     PQ codes in the bundle's id space
///   mapping.bin   forward array original id -> bundle id
///   entries.bin   optional entry vertex candidates
struct IndexBundle {
  std::filesystem::path dir;
  IndexFileParams params;
  std::string layout_kind;  // "roundrobin" | "mapped"
  VertexId medoid = 0;
  std::uint32_t build_width = 0;  // L used at construction time

  PQCodebook codebook;
  PQCodes codes;
  GraphIndex graph;
  std::vector<VertexId> forward;  // original id -> bundle id
  std::vector<VertexId> inverse;  // bundle id -> original id
  std::optional<EntryCandidates> entries;

  /// Full vectors in bundle-id order, reassembled from the index pages.
  VectorDataset load_vectors() const;
};

void save_bundle_meta(const IndexBundle& bundle);

IndexBundle load_bundle(const std::filesystem::path& dir);

}  // namespace packann
