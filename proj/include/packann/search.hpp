#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "packann/core.hpp"
#include "packann/entry_selector.hpp"
#include "packann/quantization.hpp"
#include "packann/storage.hpp"

namespace packann {

/// Routing candidates ordered by (PQ distance, id) ascending, capacity L_s.
/// Re-inserting an id already present is a no-op.
class CandidateSet {
 public:
  explicit CandidateSet(std::uint32_t capacity) : capacity_(capacity) {}

  bool insert(float pq_dist, VertexId id);
  std::size_t size() const { return items_.size(); }

  /// Up to `beam` ids, closest first, for which `expanded` is false.
  std::vector<VertexId> top_unexpanded(std::uint32_t beam,
                                       const std::vector<std::uint8_t>& expanded) const;

  const std::vector<std::pair<float, VertexId>>& items() const { return items_; }

 private:
  std::uint32_t capacity_;
  std::vector<std::pair<float, VertexId>> items_;  // sorted by (dist, id)
};

/// Results ordered by (exact distance, id) ascending, capacity k.
class ResultSet {
 public:
  explicit ResultSet(std::uint32_t k) : capacity_(k) {}

  bool insert(float full_dist, VertexId id);
  std::size_t size() const { return items_.size(); }
  const std::vector<std::pair<float, VertexId>>& items() const { return items_; }
  VertexId worst_id() const { return items_.back().second; }

 private:
  std::uint32_t capacity_;
  std::vector<std::pair<float, VertexId>> items_;
};

/// Per-query page cache pool (FIFO eviction) + circular queue of vertices not
/// yet scored + min-heap of scored vertices, powering page expansion.
/// Capacity 0 turns every operation into a no-op, which reduces pagesearch to
/// plain beamsearch semantics.
class PageHeap {
 public:
  PageHeap(std::uint32_t pool_capacity, std::uint32_t blocks_per_page)
      : capacity_(pool_capacity), b_(blocks_per_page) {}

  /// Pools a complete page and registers its not-yet-registered, unexpanded
  /// vertices in the queue. Re-caching a pooled page is a no-op.
  void cache(const PageData& page, const std::vector<std::uint8_t>& expanded);

  /// Scores every queued vertex by exact distance to the query and moves it
  /// into the min-heap.
  void update(std::span<const float> query, SearchStats& stats);

  /// Block for v when v's page is pooled; nullptr otherwise. Never does I/O.
  const DataBlock* check2ret(VertexId v) const;

  struct Scored {
    float dist;
    VertexId id;
    DataBlock block;
  };

  /// Removes and returns the minimum-distance scored vertex, if any.
  std::optional<Scored> pop();

  bool heap_empty() const { return heap_.empty(); }
  std::size_t pooled_pages() const { return pool_.size(); }

 private:
  struct HeapCmp {
    bool operator()(const Scored& a, const Scored& b) const {
      return a.dist > b.dist || (a.dist == b.dist && a.id > b.id);
    }
  };

  std::uint32_t capacity_;
  std::uint32_t b_;
  std::unordered_map<std::uint32_t, std::vector<DataBlock>> pool_;
  std::deque<std::uint32_t> pool_order_;  // FIFO eviction order
  std::deque<std::pair<VertexId, DataBlock>> queue_;
  std::priority_queue<Scored, std::vector<Scored>, HeapCmp> heap_;
  std::unordered_set<VertexId> registered_;
};

struct QueryContext {
  std::span<const float> query;
  const AdcTable& adc;
  const PQCodes& codes;
  const std::vector<std::uint8_t>& expanded;
  SearchStats& stats;
};

/// One node expansion step: scores the block itself into the result set by
/// exact distance and merges its neighbors into the candidate set by PQ
/// distance, skipping already-expanded vertices.
void neighbor_expansion(const QueryContext& ctx, const DataBlock& block, CandidateSet& cands,
                        ResultSet& results);

enum class EntryStrategy { kMedoid, kQuerySensitive };

struct QueryOutcome {
  std::vector<VertexId> ids;
  std::vector<float> distances;
  SearchStats stats;
  std::uint64_t cost_units = 0;
  // Per-hop trace for phase attribution: pages read that hop and the worst
  // result-set member at the end of that hop (kPadId while empty).
  std::vector<std::uint32_t> reads_per_hop;
  std::vector<VertexId> worst_per_hop;
};

struct PagesearchOptions {
  std::uint32_t heap_capacity = 128;  // pooled pages per query; 0 disables
  // Hard cap on page-expansion pops per iteration, as a multiple of b*B.
  std::uint32_t expansion_budget_factor = 1;
};

/// Query execution against one immutable index. Safe for concurrent queries;
/// every call opens its own I/O session.
class Searcher {
 public:
  Searcher(const StorageBackend& backend, const PQCodebook& codebook, const PQCodes& codes,
           VertexId medoid, const EntryCandidates* entries = nullptr);

  /// Beam search: per hop, reads the distinct pages of the best B unexpanded
  /// candidates, then node-expands each of them.
  QueryOutcome beamsearch(std::span<const float> query, const SearchParams& params,
                          EntryStrategy strategy = EntryStrategy::kMedoid) const;

  /// Page-based search: consults the page heap before reading, issues reads
  /// asynchronously, and page-expands cached vertices until the read lands.
  QueryOutcome pagesearch(std::span<const float> query, const SearchParams& params,
                          EntryStrategy strategy = EntryStrategy::kMedoid,
                          const PagesearchOptions& options = {}) const;

  VertexId medoid() const { return medoid_; }
  const IndexFileParams& index_params() const { return backend_.params(); }

 private:
  VertexId pick_entry(std::span<const float> query, EntryStrategy strategy,
                      SearchStats& stats) const;

  const StorageBackend& backend_;
  const PQCodebook& codebook_;
  const PQCodes& codes_;
  VertexId medoid_;
  const EntryCandidates* entries_;
};

}  // namespace packann
