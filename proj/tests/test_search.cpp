#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "packann/dataset_io.hpp"
#include "packann/graph_builder.hpp"
#include "packann/pipeline.hpp"
#include "packann/search.hpp"
#include "test_util.hpp"

using namespace packann;

namespace {

struct Searchable {
  IndexFileParams params;
  PQCodebook codebook;
  PQCodes codes;
  std::unique_ptr<SimBackend> backend;
  VertexId medoid = 0;
};

Searchable make_searchable(const GraphIndex& graph, const VectorDataset& data,
                           std::uint32_t page_size, std::uint64_t seed,
                           std::uint32_t chunks = 2, SimCosts costs = {}) {
  Searchable s;
  s.params.count = static_cast<std::uint32_t>(data.count());
  s.params.dim = static_cast<std::uint32_t>(data.dim());
  s.params.max_degree = graph.max_degree;
  s.params.page_size = page_size;
  s.params.blocks_per_page = blocks_per_page(s.params.dim, s.params.max_degree, page_size);
  const auto setup = test::make_pq(data, chunks, seed);
  s.codebook = setup.codebook;
  s.codes = setup.codes;
  std::vector<DataBlock> blocks(data.count());
  for (VertexId v = 0; v < data.count(); ++v) {
    blocks[v].id = v;
    const auto vec = data.vec(v);
    blocks[v].vector.assign(vec.begin(), vec.end());
    blocks[v].neighbors = graph.out_neighbors[v];
  }
  s.backend = std::make_unique<SimBackend>(paginate_blocks(blocks, s.params.blocks_per_page),
                                           s.params, costs);
  s.medoid = compute_medoid(data);
  return s;
}

DataBlock block_of(const GraphIndex& graph, const VectorDataset& data, VertexId v) {
  DataBlock b;
  b.id = v;
  const auto vec = data.vec(v);
  b.vector.assign(vec.begin(), vec.end());
  b.neighbors = graph.out_neighbors[v];
  return b;
}

}  // namespace

TEST_CASE("CandidateSet keeps sorted unique entries up to capacity") {
  CandidateSet c(3);
  CHECK(c.insert(5.0f, 10));
  CHECK(c.insert(2.0f, 20));
  CHECK_FALSE(c.insert(7.0f, 10));  // duplicate id
  CHECK(c.insert(1.0f, 30));
  CHECK(c.insert(3.0f, 40));  // evicts (5.0, 10)
  REQUIRE(c.size() == 3);
  CHECK(c.items()[0].second == 30);
  CHECK(c.items()[1].second == 20);
  CHECK(c.items()[2].second == 40);
  CHECK_FALSE(c.insert(9.0f, 50));  // worse than the current worst
}

TEST_CASE("neighbor_expansion") {
  const auto data = test::random_dataset(30, 4, 3);
  const auto graph = test::random_graph(30, 4, 4);
  const auto setup = test::make_pq(data, 2, 5);
  const auto query = data.vec(7);
  const AdcTable adc = adc_table(setup.codebook, query);
  std::vector<std::uint8_t> expanded(30, 0);
  SearchStats stats;
  QueryContext ctx{query, adc, setup.codes, expanded, stats};

  SUBCASE("a block without neighbors only contributes its own result") {
    CandidateSet c(8);
    ResultSet r(4);
    DataBlock blank = block_of(graph, data, 3);
    blank.neighbors.clear();
    neighbor_expansion(ctx, blank, c, r);
    CHECK(c.size() == 0);
    REQUIRE(r.size() == 1);
    CHECK(r.items()[0].second == 3);
  }

  SUBCASE("already-listed neighbors are not duplicated") {
    CandidateSet c(8);
    ResultSet r(4);
    const DataBlock b = block_of(graph, data, 3);
    neighbor_expansion(ctx, b, c, r);
    const std::size_t before = c.size();
    neighbor_expansion(ctx, b, c, r);
    CHECK(c.size() == before);
    CHECK(r.size() == 1);
  }

  SUBCASE("random instances match a straight-line reference routine") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      CandidateSet c(6);
      ResultSet r(3);
      // Reference state mirrors (distance, id) lists directly.
      std::vector<std::pair<float, VertexId>> ref_c, ref_r;
      std::vector<std::uint8_t> ref_expanded(30, 0);
      for (int step = 0; step < 4; ++step) {
        const VertexId v = static_cast<VertexId>(rng() % 30);
        const DataBlock b = block_of(graph, data, v);
        neighbor_expansion(ctx, b, c, r);
        // Straight-line re-implementation.
        for (VertexId u : b.neighbors) {
          if (ref_expanded[u]) continue;
          bool present = false;
          for (auto& [d, id] : ref_c) present |= (id == u);
          if (!present) {
            ref_c.emplace_back(pq_distance(adc, setup.codes.code(u)), u);
          }
        }
        std::sort(ref_c.begin(), ref_c.end());
        if (ref_c.size() > 6) ref_c.resize(6);
        bool present = false;
        for (auto& [d, id] : ref_r) present |= (id == v);
        if (!present) ref_r.emplace_back(exact_distance(query, b.vector), v);
        std::sort(ref_r.begin(), ref_r.end());
        if (ref_r.size() > 3) ref_r.resize(3);
      }
      CHECK(c.items() == ref_c);
      CHECK(r.items() == ref_r);
    }
  }
}

TEST_CASE("PageHeap operator contracts") {
  const auto data = test::random_dataset(24, 4, 7);
  const auto graph = test::random_graph(24, 3, 8);
  const std::uint32_t b = 4;
  std::vector<std::uint8_t> expanded(24, 0);
  const auto query = data.vec(0);
  SearchStats stats;

  auto page_data = [&](std::uint32_t page) {
    PageData p;
    p.page_index = page;
    for (std::uint32_t s = 0; s < b; ++s) {
      const VertexId v = page * b + s;
      if (v < 24) p.blocks.push_back(block_of(graph, data, v));
    }
    return p;
  };

  SUBCASE("caching registers each vertex once; re-cache is a no-op") {
    PageHeap heap(4, b);
    heap.cache(page_data(1), expanded);
    heap.update(query, stats);
    heap.cache(page_data(1), expanded);  // no-op
    heap.update(query, stats);
    std::set<VertexId> seen;
    while (auto e = heap.pop()) {
      CHECK(seen.insert(e->id).second);
    }
    CHECK(seen.size() == b);
  }

  SUBCASE("FIFO eviction forgets the oldest page") {
    PageHeap heap(2, b);
    heap.cache(page_data(0), expanded);
    heap.cache(page_data(1), expanded);
    CHECK(heap.check2ret(0) != nullptr);
    heap.cache(page_data(2), expanded);  // evicts page 0
    CHECK(heap.check2ret(0) == nullptr);
    CHECK(heap.check2ret(4) != nullptr);
    CHECK(heap.check2ret(8) != nullptr);
  }

  SUBCASE("check2ret hits only pooled pages and never reads") {
    PageHeap heap(4, b);
    CHECK(heap.check2ret(5) == nullptr);
    heap.cache(page_data(1), expanded);
    const DataBlock* blk = heap.check2ret(5);
    REQUIRE(blk != nullptr);
    CHECK(blk->id == 5);
  }

  SUBCASE("update scores the queue and pop returns the closest first") {
    PageHeap heap(4, b);
    heap.cache(page_data(2), expanded);
    heap.update(query, stats);
    float best = std::numeric_limits<float>::max();
    VertexId arg = kPadId;
    for (VertexId v = 8; v < 12; ++v) {
      const float d = exact_distance(query, data.vec(v));
      if (d < best) {
        best = d;
        arg = v;
      }
    }
    const auto top = heap.pop();
    REQUIRE(top.has_value());
    CHECK(top->id == arg);
    CHECK(top->dist == best);
  }

  SUBCASE("empty heap pops nothing; empty queue update is a no-op") {
    PageHeap heap(4, b);
    heap.update(query, stats);
    CHECK_FALSE(heap.pop().has_value());
  }

  SUBCASE("interleaved cache/update/pop obey a sorted-multiset oracle") {
    PageHeap heap(8, b);
    std::multiset<std::pair<float, VertexId>> oracle;
    std::mt19937_64 rng(9);
    std::vector<std::uint32_t> pages{0, 1, 2, 3, 4, 5};
    std::shuffle(pages.begin(), pages.end(), rng);
    for (std::uint32_t page : pages) {
      const auto pd = page_data(page);
      heap.cache(pd, expanded);
      heap.update(query, stats);
      for (const auto& blk : pd.blocks) {
        oracle.emplace(exact_distance(query, blk.vector), blk.id);
      }
      // Pop a couple each round; order must match the oracle's minimum.
      for (int k = 0; k < 2 && !oracle.empty(); ++k) {
        const auto got = heap.pop();
        REQUIRE(got.has_value());
        CHECK(got->dist == oracle.begin()->first);
        CHECK(got->id == oracle.begin()->second);
        oracle.erase(oracle.begin());
      }
    }
    while (!oracle.empty()) {
      const auto got = heap.pop();
      REQUIRE(got.has_value());
      CHECK(got->id == oracle.begin()->second);
      oracle.erase(oracle.begin());
    }
  }

  SUBCASE("capacity zero disables pooling entirely") {
    PageHeap heap(0, b);
    heap.cache(page_data(0), expanded);
    CHECK(heap.check2ret(0) == nullptr);
    heap.update(query, stats);
    CHECK_FALSE(heap.pop().has_value());
  }
}

TEST_CASE("beamsearch on a single-vertex index") {
  VectorDataset data(4, 1);
  GraphIndex g;
  g.max_degree = 2;
  g.out_neighbors.resize(1);
  const auto s = make_searchable(g, data, 256, 11);
  Searcher searcher(*s.backend, s.codebook, s.codes, 0);
  const auto out = searcher.beamsearch(data.vec(0), {1, 1, 1});
  REQUIRE(out.ids.size() == 1);
  CHECK(out.ids[0] == 0);
  CHECK(out.stats.ssd_page_reads == 1);
}

TEST_CASE("beamsearch on a complete graph returns the exact top-k") {
  const auto data = test::random_dataset(20, 8, 13);
  GraphIndex g;
  g.max_degree = 19;
  g.out_neighbors.resize(20);
  for (VertexId v = 0; v < 20; ++v) {
    for (VertexId u = 0; u < 20; ++u) {
      if (u != v) g.out_neighbors[v].push_back(u);
    }
  }
  const auto s = make_searchable(g, data, 512, 14);
  Searcher searcher(*s.backend, s.codebook, s.codes, s.medoid);
  const auto queries = test::random_dataset(10, 8, 15);
  const auto truth = ground_truth(data, queries, 5);
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto out = searcher.beamsearch(queries.vec(static_cast<VertexId>(qi)), {20, 20, 5});
    CHECK(out.ids == truth[qi]);
  }
}

TEST_CASE("beamsearch reaches 0.95 recall on a clustered build") {
  const auto model = make_cluster_model(16, 20, 17, 50.0f, 4);
  const auto data = sample_clusters(model, 2000, 18);
  const auto queries = sample_clusters(model, 100, 19);
  BuildParams params;
  params.max_degree = 32;
  params.build_width = 128;
  const auto graph = build_vamana(data, params, 20);
  const auto s = make_searchable(graph, data, 800, 21, 16);
  Searcher searcher(*s.backend, s.codebook, s.codes, s.medoid);
  const auto truth = ground_truth(data, queries, 10);
  double recall = 0.0;
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto out = searcher.beamsearch(queries.vec(static_cast<VertexId>(qi)), {4, 100, 10});
    recall += recall_at_k(out.ids, truth[qi], 10);
    // Result validity: reported distances are true exact distances.
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
      CHECK(out.distances[i] ==
            exact_distance(queries.vec(static_cast<VertexId>(qi)), data.vec(out.ids[i])));
    }
    // Termination bound and per-hop accounting.
    CHECK(out.stats.hops <= data.count());
    CHECK(out.reads_per_hop.size() == out.stats.hops);
  }
  CHECK(recall / queries.count() >= 0.95);
}

TEST_CASE("pagesearch degenerates to beamsearch with heap capacity zero") {
  const auto model = make_cluster_model(8, 10, 23, 50.0f, 4);
  const auto data = sample_clusters(model, 800, 24);
  const auto queries = sample_clusters(model, 40, 25);
  BuildParams params;
  params.max_degree = 16;
  params.build_width = 32;
  const auto graph = build_vamana(data, params, 26);
  const auto s = make_searchable(graph, data, 512, 27, 8);
  Searcher searcher(*s.backend, s.codebook, s.codes, s.medoid);
  PagesearchOptions off;
  off.heap_capacity = 0;
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto q = queries.vec(static_cast<VertexId>(qi));
    const auto beam = searcher.beamsearch(q, {4, 32, 5});
    const auto page = searcher.pagesearch(q, {4, 32, 5}, EntryStrategy::kMedoid, off);
    CHECK(beam.ids == page.ids);
    CHECK(beam.distances == page.distances);
    CHECK(beam.stats.ssd_page_reads == page.stats.ssd_page_reads);
    CHECK(page.stats.cache_hits == 0);
  }
}

TEST_CASE("a co-paged next hop is served from the pool without a new read") {
  // Vertices 0 and 1 share page 0; 1 is 0's only neighbor and the best hit.
  VectorDataset data(2, std::vector<float>{0.0f, 0.0f, 1.0f, 1.0f});
  GraphIndex g;
  g.max_degree = 2;
  g.out_neighbors = {{1}, {0}};
  const auto s = make_searchable(g, data, 256, 29, 1);
  REQUIRE(s.params.blocks_per_page >= 2);
  Searcher searcher(*s.backend, s.codebook, s.codes, 0);
  const std::vector<float> query{1.0f, 1.0f};
  const auto out = searcher.pagesearch(query, {1, 4, 2});
  CHECK(out.stats.ssd_page_reads == 1);
  CHECK(out.stats.cache_hits >= 1);
  REQUIRE_FALSE(out.ids.empty());
  CHECK(out.ids[0] == 1);
}

TEST_CASE("pagesearch on a mapped layout beats beamsearch on round-robin") {
  const auto model = make_cluster_model(16, 20, 31, 50.0f, 4);
  const auto data = sample_clusters(model, 2000, 32);
  const auto queries = sample_clusters(model, 100, 33);
  const auto dir = std::filesystem::temp_directory_path() / "packann_paired";
  std::filesystem::remove_all(dir);
  BuildConfig config;
  config.build.max_degree = 32;
  config.build.build_width = 64;
  config.pq_chunks = 16;
  config.page_size = 800;
  config.seed = 34;
  const auto rr = build_bundle(data, dir / "rr", config);
  const auto mapped = map_bundle(rr, dir / "mapped");
  SimBackend rr_backend(dir / "rr" / "pages.bin", SimCosts{});
  SimBackend mapped_backend(dir / "mapped" / "pages.bin", SimCosts{});
  Searcher beam(rr_backend, rr.codebook, rr.codes, rr.medoid);
  Searcher page(mapped_backend, mapped.codebook, mapped.codes, mapped.medoid);
  const auto truth = ground_truth(data, queries, 10);
  double beam_recall = 0, page_recall = 0;
  std::uint64_t beam_reads = 0, page_reads = 0;
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto q = queries.vec(static_cast<VertexId>(qi));
    const auto b = beam.beamsearch(q, {4, 100, 10});
    const auto p = page.pagesearch(q, {4, 100, 10});
    beam_recall += recall_at_k(b.ids, truth[qi], 10);
    std::vector<VertexId> original;
    for (VertexId id : p.ids) original.push_back(mapped.inverse[id]);
    page_recall += recall_at_k(original, truth[qi], 10);
    beam_reads += b.stats.ssd_page_reads;
    page_reads += p.stats.ssd_page_reads;
    // Expanded-at-most-once: hops * beam bounds the distinct expansions.
    CHECK(p.stats.full_distance_evals <= data.count() + p.stats.cache_hits + queries.count());
  }
  CHECK(page_recall >= beam_recall - 0.01 * queries.count());
  CHECK(page_reads < beam_reads);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mean hops are non-increasing across an n_cluster sweep") {
  const auto model = make_cluster_model(16, 30, 61, 50.0f, 4);
  const auto data = sample_clusters(model, 4000, 62);
  const auto queries = sample_clusters(model, 200, 63);
  BuildParams params;
  params.max_degree = 24;
  params.build_width = 48;
  const auto graph = build_vamana(data, params, 64);
  const auto s = make_searchable(graph, data, 800, 65, 16);
  std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
  for (std::uint32_t nc : {1u, 16u, 64u}) {
    const auto centroids = minibatch_kmeans(data, nc, 256, 40, 66);
    const auto entries = gen_entry_candidates(graph, data, centroids, nc, s.medoid, 48);
    Searcher searcher(*s.backend, s.codebook, s.codes, s.medoid, &entries);
    std::uint64_t hops = 0;
    for (std::size_t qi = 0; qi < queries.count(); ++qi) {
      hops += searcher
                  .beamsearch(queries.vec(static_cast<VertexId>(qi)), {4, 64, 10},
                              EntryStrategy::kQuerySensitive)
                  .stats.hops;
    }
    CHECK(hops <= previous);
    previous = hops;
  }
}

TEST_CASE("query-sensitive entries reduce mean hops on clustered data") {
  // Empirical hop-dominance check over 500 queries.
  const auto model = make_cluster_model(8, 16, 41, 50.0f, 4);
  const auto data = sample_clusters(model, 3000, 42);
  const auto queries = sample_clusters(model, 500, 43);
  BuildParams params;
  params.max_degree = 16;
  params.build_width = 32;
  const auto graph = build_vamana(data, params, 44);
  const auto s = make_searchable(graph, data, 512, 45, 8);
  const auto centroids = minibatch_kmeans(data, 16, 256, 30, 46);
  const auto entries =
      gen_entry_candidates(graph, data, centroids, 16, s.medoid, params.build_width);
  Searcher searcher(*s.backend, s.codebook, s.codes, s.medoid, &entries);
  std::uint64_t medoid_hops = 0, sensitive_hops = 0;
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto q = queries.vec(static_cast<VertexId>(qi));
    medoid_hops += searcher.beamsearch(q, {4, 32, 5}, EntryStrategy::kMedoid).stats.hops;
    sensitive_hops +=
        searcher.beamsearch(q, {4, 32, 5}, EntryStrategy::kQuerySensitive).stats.hops;
  }
  CHECK(sensitive_hops <= medoid_hops);
}
