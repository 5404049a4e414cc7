#include "packann/search.hpp"

#include <algorithm>
#include <stdexcept>

namespace packann {

bool CandidateSet::insert(float pq_dist, VertexId id) {
  for (const auto& [d, existing] : items_) {
    if (existing == id) return false;
  }
  const std::pair<float, VertexId> entry{pq_dist, id};
  auto pos = std::lower_bound(items_.begin(), items_.end(), entry);
  if (items_.size() >= capacity_ && pos == items_.end()) return false;
  items_.insert(pos, entry);
  if (items_.size() > capacity_) items_.pop_back();
  return true;
}

std::vector<VertexId> CandidateSet::top_unexpanded(
    std::uint32_t beam, const std::vector<std::uint8_t>& expanded) const {
  std::vector<VertexId> out;
  for (const auto& [d, id] : items_) {
    if (expanded[id]) continue;
    out.push_back(id);
    if (out.size() >= beam) break;
  }
  return out;
}

bool ResultSet::insert(float full_dist, VertexId id) {
  for (const auto& [d, existing] : items_) {
    if (existing == id) return false;
  }
  const std::pair<float, VertexId> entry{full_dist, id};
  auto pos = std::lower_bound(items_.begin(), items_.end(), entry);
  if (items_.size() >= capacity_ && pos == items_.end()) return false;
  items_.insert(pos, entry);
  if (items_.size() > capacity_) items_.pop_back();
  return true;
}

void PageHeap::cache(const PageData& page, const std::vector<std::uint8_t>& expanded) {
  if (capacity_ == 0) return;
  if (pool_.count(page.page_index)) return;  // no-op for pool and queue alike
  if (pool_.size() >= capacity_) {
    pool_.erase(pool_order_.front());
    pool_order_.pop_front();
  }
  pool_.emplace(page.page_index, page.blocks);
  pool_order_.push_back(page.page_index);
  for (const DataBlock& block : page.blocks) {
    if (expanded[block.id]) continue;
    if (!registered_.insert(block.id).second) continue;
    queue_.emplace_back(block.id, block);
  }
}

void PageHeap::update(std::span<const float> query, SearchStats& stats) {
  while (!queue_.empty()) {
    auto [id, block] = std::move(queue_.front());
    queue_.pop_front();
    const float dist = exact_distance(query, block.vector);
    ++stats.full_distance_evals;
    heap_.push(Scored{dist, id, std::move(block)});
  }
}

const DataBlock* PageHeap::check2ret(VertexId v) const {
  auto it = pool_.find(page_of(v, b_));
  if (it == pool_.end()) return nullptr;
  const std::uint32_t slot = v % b_;
  if (slot >= it->second.size()) return nullptr;
  return &it->second[slot];
}

std::optional<PageHeap::Scored> PageHeap::pop() {
  if (heap_.empty()) return std::nullopt;
  Scored top = heap_.top();
  heap_.pop();
  return top;
}

void neighbor_expansion(const QueryContext& ctx, const DataBlock& block, CandidateSet& cands,
                        ResultSet& results) {
  for (VertexId u : block.neighbors) {
    if (ctx.expanded[u]) continue;
    const float d = pq_distance(ctx.adc, ctx.codes.code(u));
    ++ctx.stats.pq_distance_evals;
    cands.insert(d, u);
  }
  const float full = exact_distance(ctx.query, block.vector);
  ++ctx.stats.full_distance_evals;
  results.insert(full, block.id);
}

Searcher::Searcher(const StorageBackend& backend, const PQCodebook& codebook,
                   const PQCodes& codes, VertexId medoid, const EntryCandidates* entries)
    : backend_(backend), codebook_(codebook), codes_(codes), medoid_(medoid),
      entries_(entries) {
  if (medoid_ >= backend_.params().count) {
    throw std::invalid_argument("Searcher: medoid id out of range");
  }
}

VertexId Searcher::pick_entry(std::span<const float> query, EntryStrategy strategy,
                              SearchStats& stats) const {
  if (strategy == EntryStrategy::kMedoid) return medoid_;
  if (!entries_) {
    throw std::invalid_argument("query-sensitive entry requested without candidates");
  }
  return select_entry(*entries_, query, &stats.full_distance_evals);
}

QueryOutcome Searcher::beamsearch(std::span<const float> query, const SearchParams& params,
                                  EntryStrategy strategy) const {
  params.check_valid();
  const IndexFileParams& ip = backend_.params();
  QueryOutcome out;
  SearchStats& stats = out.stats;

  const VertexId entry = pick_entry(query, strategy, stats);
  if (entry >= ip.count) throw std::invalid_argument("beamsearch: entry id out of range");

  const AdcTable adc = adc_table(codebook_, query);
  std::vector<std::uint8_t> expanded(ip.count, 0);
  QueryContext ctx{query, adc, codes_, expanded, stats};
  CandidateSet cands(params.search_width);
  ResultSet results(params.k);
  auto session = backend_.open_session();

  cands.insert(pq_distance(adc, codes_.code(entry)), entry);
  ++stats.pq_distance_evals;

  while (true) {
    const std::vector<VertexId> frontier = cands.top_unexpanded(params.beam, expanded);
    if (frontier.empty()) break;
    ++stats.hops;

    std::vector<std::uint32_t> pages;
    pages.reserve(frontier.size());
    for (VertexId v : frontier) pages.push_back(page_of(v, ip.blocks_per_page));
    const std::uint64_t before = session->pages_read();
    auto handle = session->read_pages(pages);
    const ReadResult& read = handle->wait();

    for (VertexId v : frontier) {
      const PageData* page = read.find(page_of(v, ip.blocks_per_page));
      const DataBlock& block = page->blocks[v % ip.blocks_per_page];
      neighbor_expansion(ctx, block, cands, results);
      expanded[v] = 1;
      session->tick(1);
    }
    out.reads_per_hop.push_back(static_cast<std::uint32_t>(session->pages_read() - before));
    out.worst_per_hop.push_back(results.size() ? results.worst_id() : kPadId);
  }

  stats.ssd_page_reads = session->pages_read();
  out.cost_units = session->cost_units();
  for (const auto& [d, id] : results.items()) {
    out.ids.push_back(id);
    out.distances.push_back(d);
  }
  return out;
}

QueryOutcome Searcher::pagesearch(std::span<const float> query, const SearchParams& params,
                                  EntryStrategy strategy,
                                  const PagesearchOptions& options) const {
  params.check_valid();
  const IndexFileParams& ip = backend_.params();
  QueryOutcome out;
  SearchStats& stats = out.stats;

  const VertexId entry = pick_entry(query, strategy, stats);
  if (entry >= ip.count) throw std::invalid_argument("pagesearch: entry id out of range");

  const AdcTable adc = adc_table(codebook_, query);
  std::vector<std::uint8_t> expanded(ip.count, 0);
  QueryContext ctx{query, adc, codes_, expanded, stats};
  CandidateSet cands(params.search_width);
  ResultSet results(params.k);
  PageHeap heap(options.heap_capacity, ip.blocks_per_page);
  auto session = backend_.open_session();

  cands.insert(pq_distance(adc, codes_.code(entry)), entry);
  ++stats.pq_distance_evals;

  const std::uint64_t pop_budget = static_cast<std::uint64_t>(options.expansion_budget_factor) *
                                   ip.blocks_per_page * params.beam;

  while (true) {
    const std::vector<VertexId> frontier = cands.top_unexpanded(params.beam, expanded);
    if (frontier.empty()) break;
    ++stats.hops;

    // Register reads only for frontier vertices the pool cannot serve.
    std::unordered_map<VertexId, DataBlock> from_pool;
    std::vector<std::uint32_t> misses;
    for (VertexId v : frontier) {
      if (const DataBlock* block = heap.check2ret(v)) {
        from_pool.emplace(v, *block);
        ++stats.cache_hits;
      } else {
        misses.push_back(page_of(v, ip.blocks_per_page));
      }
    }
    const std::uint64_t before = session->pages_read();
    auto handle = session->read_pages(misses);

    // Page expansion overlaps the in-flight read: drain scored vertices until
    // the read completes, the heap empties, or the pop budget runs out.
    heap.update(query, stats);
    std::uint64_t pops = 0;
    while (pops < pop_budget) {
      auto scored = heap.pop();
      if (!scored) break;
      if (expanded[scored->id]) continue;
      neighbor_expansion(ctx, scored->block, cands, results);
      expanded[scored->id] = 1;
      ++pops;
      session->tick(1);
      if (handle->done()) break;
    }

    const ReadResult& read = handle->wait();
    for (const PageData& page : read.pages) heap.cache(page, expanded);

    // Node expansion for frontier vertices not consumed by page expansion.
    for (VertexId v : frontier) {
      if (expanded[v]) continue;
      const DataBlock* block = nullptr;
      auto it = from_pool.find(v);
      if (it != from_pool.end()) {
        block = &it->second;
      } else {
        const PageData* page = read.find(page_of(v, ip.blocks_per_page));
        block = &page->blocks[v % ip.blocks_per_page];
      }
      neighbor_expansion(ctx, *block, cands, results);
      expanded[v] = 1;
      session->tick(1);
    }
    out.reads_per_hop.push_back(static_cast<std::uint32_t>(session->pages_read() - before));
    out.worst_per_hop.push_back(results.size() ? results.worst_id() : kPadId);
  }

  stats.ssd_page_reads = session->pages_read();
  out.cost_units = session->cost_units();
  for (const auto& [d, id] : results.items()) {
    out.ids.push_back(id);
    out.distances.push_back(d);
  }
  return out;
}

}  // namespace packann
