#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace packann {

using VertexId = std::uint32_t;

/// Reserved padding sentinel for unused page slots. Never a valid vertex id
/// (ids are dense 0..N-1), so 0 stays usable as a real vertex.
inline constexpr VertexId kPadId = std::numeric_limits<VertexId>::max();

/// Dense collection of `count` vectors, each `dim` 32-bit floats, contiguous.
class VectorDataset {
 public:
  VectorDataset() = default;
  VectorDataset(std::size_t dim, std::size_t count)
      : dim_(dim), count_(count), data_(dim * count, 0.0f) {}
  VectorDataset(std::size_t dim, std::vector<float> data);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }

  std::span<const float> vec(VertexId id) const {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  std::span<float> mutable_vec(VertexId id) {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  const std::vector<float>& raw() const { return data_; }

  /// Throws std::invalid_argument if empty or any component is non-finite.
  void check_valid() const;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> data_;
};

/// Bounded-out-degree adjacency over dense vertex ids.
struct GraphIndex {
  std::uint32_t max_degree = 0;  // R
  std::vector<std::vector<VertexId>> out_neighbors;

  std::size_t size() const { return out_neighbors.size(); }
  std::span<const VertexId> neighbors(VertexId v) const {
    return out_neighbors[v];
  }

  /// Invariants: no self-loops, no duplicate neighbors, degree <= R,
  /// all ids < size(). Throws std::runtime_error on violation.
  void check_valid() const;

  void save(const std::string& path) const;
  static GraphIndex load(const std::string& path);
};

/// One vertex's on-disk payload: full vector plus neighbor id list.
struct DataBlock {
  VertexId id = kPadId;
  std::vector<float> vector;
  std::vector<VertexId> neighbors;
};

/// Fixed-width page of b id slots; the first valid_count slots hold vertex
/// ids, the rest hold kPadId.
struct LogicalPage {
  std::vector<VertexId> slots;
  std::uint32_t valid_count = 0;
};

struct Layout {
  std::uint32_t page_capacity = 0;  // b
  std::vector<LogicalPage> pages;

  std::size_t total_valid() const;
};

/// Composed id bijection f = f_surj . f_inj with explicit inverse.
struct IdMapping {
  std::vector<VertexId> f_inj;    // old id -> temp id
  std::vector<VertexId> f_surj;   // temp id -> final id (kPadId on pad slots)
  std::vector<VertexId> forward;  // old id -> final id
  std::vector<VertexId> inverse;  // final id -> old id

  void save_forward(const std::string& path) const;
  static std::vector<VertexId> load_forward(const std::string& path);
};

struct SearchParams {
  std::uint32_t beam = 4;          // B
  std::uint32_t search_width = 0;  // L_s, must be >= k
  std::uint32_t k = 0;

  /// Throws std::invalid_argument unless B >= 1 and L_s >= k >= 1.
  void check_valid() const;
};

/// Per-query instrumentation; all counters monotone during a query.
struct SearchStats {
  std::uint64_t ssd_page_reads = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t hops = 0;
  std::uint64_t full_distance_evals = 0;
  std::uint64_t pq_distance_evals = 0;
};

/// Page index of the block with id `id` under capacity `b`: blocks are laid
/// out densely so block i occupies page i/b, slot i%b.
inline std::uint32_t page_of(VertexId id, std::uint32_t b) { return id / b; }

/// The layout every valid id set maps to after merging: page p holds ids
/// p*b .. p*b+valid-1, all pages full except possibly the last.
Layout dense_layout(std::size_t n, std::uint32_t b);

/// Checks all Layout invariants plus exact coverage of ids 0..n-1.
/// Violations are returned as data (stable "kind: detail" strings), not
/// thrown; an empty result means the layout is a valid final layout.
std::vector<std::string> validate_layout(const Layout& layout, std::size_t n);

}  // namespace packann
