// Acceptance suite: end-to-end checks over a fixed desk-scale corpus
// (20000 points, 16 dims, 50 clusters, 100 queries, all seeds pinned below).
// Each case prints one PASS/FAIL line.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "packann/bench.hpp"
#include "packann/compactness.hpp"
#include "packann/dataset_io.hpp"
#include "packann/pipeline.hpp"
#include "packann/search.hpp"
#include "test_util.hpp"

using namespace packann;

namespace {

// Reference corpus constants. Everything downstream is deterministic in
// these, so the suite is reproducible bit-for-bit.
constexpr std::size_t kCount = 20000;
constexpr std::size_t kDim = 16;
constexpr std::uint32_t kClusters = 50;
constexpr std::uint32_t kIntrinsicDim = 4;
constexpr std::size_t kQueries = 100;
constexpr std::uint64_t kCorpusSeed = 42;
constexpr std::uint64_t kBuildSeed = 7;
constexpr std::uint64_t kEntrySeed = 21;
constexpr std::uint32_t kPageSize = 800;  // 4 blocks per page at d=16, R=32
constexpr std::uint32_t kK = 10;
const SearchParams kParams{4, 100, kK};

struct Fixture {
  VectorDataset data;
  VectorDataset queries;
  IndexBundle rr;
  IndexBundle mapped;
  std::unique_ptr<SimBackend> rr_backend;
  std::unique_ptr<SimBackend> mapped_backend;
  std::vector<std::vector<VertexId>> truth;
  std::filesystem::path dir;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture fx;
    fx.dir = std::filesystem::temp_directory_path() / "packann_acceptance";
    std::filesystem::remove_all(fx.dir);
    const auto model = make_cluster_model(kDim, kClusters, kCorpusSeed, 50.0f, kIntrinsicDim);
    fx.data = sample_clusters(model, kCount, kCorpusSeed + 1);
    fx.queries = sample_clusters(model, kQueries, kCorpusSeed + 2);

    BuildConfig config;
    config.build.max_degree = 32;
    config.build.build_width = 128;
    config.build.alpha1 = 1.0f;
    config.build.alpha2 = 1.2f;
    config.pq_chunks = 16;
    config.pq_iters = 12;
    config.page_size = kPageSize;
    config.seed = kBuildSeed;
    fx.rr = build_bundle(fx.data, fx.dir / "rr", config);
    fx.mapped = map_bundle(fx.rr, fx.dir / "mapped");
    add_entries(fx.rr, 64, 256, 50, kEntrySeed);
    add_entries(fx.mapped, 64, 256, 50, kEntrySeed);
    fx.rr_backend = std::make_unique<SimBackend>(fx.dir / "rr" / "pages.bin", SimCosts{});
    fx.mapped_backend =
        std::make_unique<SimBackend>(fx.dir / "mapped" / "pages.bin", SimCosts{});
    fx.truth = ground_truth(fx.data, fx.queries, kK);
    return fx;
  }();
  return f;
}

void report(int index, const char* name, bool pass, const std::string& detail = "") {
  std::printf("[acceptance] %2d %-34s %s%s%s\n", index, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : "  -- ", detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, name << " " << detail);
}

double lambda2_oracle(const std::vector<double>& lap, std::uint32_t n) {
  Eigen::MatrixXd m(n, n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) m(i, j) = lap[i * n + j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  return solver.eigenvalues()(1);
}

}  // namespace

TEST_CASE("criterion 1: mapping is a bijection and edge-isomorphism") {
  std::mt19937_64 rng(4242);
  bool ok = true;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    const std::size_t n = 100 + rng() % 1901;          // N in [100, 2000]
    const std::uint32_t r = std::array{8u, 16u, 32u}[rng() % 3];
    const std::uint32_t b = 2 + rng() % 7;             // b in {2..8}
    const auto data = test::random_dataset(n, 8, rng());
    BuildParams params;
    params.max_degree = r;
    params.build_width = 2 * r;
    const auto graph = build_vamana(data, params, rng());
    const auto setup = test::make_pq(data, 2, rng(), 2);
    const auto packed = pack(graph, data, setup.codebook, setup.codes, b);
    const auto merged = merge(packed.layout, b);
    IdMapping mapping;
    try {
      mapping = compose_mapping(packed.f_inj, merged.f_surj);
    } catch (const std::exception&) {
      ok = false;
      break;
    }
    for (VertexId v = 0; v < n && ok; ++v) {
      ok = mapping.inverse[mapping.forward[v]] == v;
    }
    ok = ok && validate_layout(merged.layout, n).empty();
    // Edge isomorphism under forward, both directions.
    const auto remapped = remap_graph(graph, mapping);
    std::set<std::pair<VertexId, VertexId>> original, image;
    for (VertexId v = 0; v < n; ++v) {
      for (VertexId u : graph.out_neighbors[v]) {
        original.emplace(mapping.forward[v], mapping.forward[u]);
      }
      for (VertexId u : remapped.out_neighbors[v]) image.emplace(v, u);
    }
    ok = ok && original == image;
  }
  report(1, "mapping-bijection-isomorphism", ok);
}

TEST_CASE("criterion 2: spectral kernel matches a dense eigensolver") {
  std::mt19937_64 rng(777);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint32_t n = 2 + rng() % 11;
    GraphIndex g;
    g.max_degree = n;
    g.out_neighbors.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (rng() % 3 == 0) {
          g.out_neighbors[i].push_back(j);
          g.out_neighbors[j].push_back(i);
        }
      }
    }
    std::vector<VertexId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    const auto sub = induced_subgraph(g, ids);
    const auto lap = laplacian(sub);
    const double ours = algebraic_connectivity(lap, n);
    const double oracle = lambda2_oracle(lap, n);
    worst = std::max(worst, std::abs(ours - (oracle < 1e-9 ? 0.0 : oracle)));
    if (std::abs(ours - (oracle < 1e-9 ? 0.0 : oracle)) > 1e-8) ok = false;
    if ((ours == 0.0) != (diameter(sub) == kInfiniteDiameter)) ok = false;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |diff| = %.3g", worst);
  report(2, "spectral-oracle-agreement", ok, buf);
}

TEST_CASE("criterion 3: page compactness of mapped vs round-robin layout") {
  const auto& fx = fixture();
  const auto mapped_report = layout_report(
      fx.mapped.graph, dense_layout(fx.mapped.params.count, fx.mapped.params.blocks_per_page));
  const auto rr_report = layout_report(
      fx.rr.graph, dense_layout(fx.rr.params.count, fx.rr.params.blocks_per_page));

  bool every_connected_above_half = true;
  std::size_t connected = 0;
  double gamma_sum = 0.0;
  for (const auto& row : mapped_report.per_page) {
    if (row.valid_count < 2 || row.diameter == kInfiniteDiameter) continue;
    ++connected;
    gamma_sum += row.gamma;
    // Pure stars attain exactly 0.5; allow eigensolver round-off only.
    if (row.gamma < 0.5 - 1e-9) every_connected_above_half = false;
  }
  const double mean_connected = connected ? gamma_sum / connected : 0.0;

  std::size_t rr_zero = 0;
  double rr_sum = 0.0;
  for (const auto& row : rr_report.per_page) {
    if (row.gamma == 0.0) ++rr_zero;
    rr_sum += row.gamma;
  }
  const double rr_zero_frac = static_cast<double>(rr_zero) / rr_report.per_page.size();
  const double rr_mean = rr_sum / rr_report.per_page.size();

  const bool ok = fx.mapped.params.blocks_per_page >= 3 && every_connected_above_half &&
                  mean_connected >= 0.5 && rr_zero_frac >= 0.5 && rr_mean <= 0.1;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mapped: %zu connected pages, mean gamma %.3f; rr: %.1f%% zero, mean %.4f",
                connected, mean_connected, 100.0 * rr_zero_frac, rr_mean);
  report(3, "page-compactness", ok, buf);
}

TEST_CASE("criterion 4: round-robin pages of random regular graphs disconnect") {
  std::size_t pages_total = 0, pages_disconnected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = test::random_regular_graph(5000, 16, seed);
    const auto report = layout_report(g, dense_layout(5000, 4));
    for (const auto& row : report.per_page) {
      ++pages_total;
      if (row.gamma == 0.0) ++pages_disconnected;
    }
  }
  const double frac = static_cast<double>(pages_disconnected) / pages_total;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "disconnected fraction %.4f", frac);
  report(4, "random-regular-disconnection", frac >= 0.9, buf);
}

namespace {

struct PairedRun {
  double beam_recall = 0.0;
  double page_recall = 0.0;
  double beam_reads = 0.0;
  double page_reads = 0.0;
};

PairedRun paired_beam_vs_page() {
  const auto& fx = fixture();
  Searcher beam(*fx.rr_backend, fx.rr.codebook, fx.rr.codes, fx.rr.medoid);
  Searcher page(*fx.mapped_backend, fx.mapped.codebook, fx.mapped.codes, fx.mapped.medoid);
  PairedRun out;
  for (std::size_t qi = 0; qi < fx.queries.count(); ++qi) {
    const auto q = fx.queries.vec(static_cast<VertexId>(qi));
    const auto b = beam.beamsearch(q, kParams);
    const auto p = page.pagesearch(q, kParams);
    out.beam_recall += recall_at_k(b.ids, fx.truth[qi], kK);
    std::vector<VertexId> original;
    for (VertexId id : p.ids) original.push_back(fx.mapped.inverse[id]);
    out.page_recall += recall_at_k(original, fx.truth[qi], kK);
    out.beam_reads += static_cast<double>(b.stats.ssd_page_reads);
    out.page_reads += static_cast<double>(p.stats.ssd_page_reads);
  }
  const double n = static_cast<double>(fx.queries.count());
  out.beam_recall /= n;
  out.page_recall /= n;
  out.beam_reads /= n;
  out.page_reads /= n;
  return out;
}

}  // namespace

TEST_CASE("criterion 5: search accuracy") {
  const auto run = paired_beam_vs_page();
  const bool ok = run.beam_recall >= 0.95 && run.page_recall >= run.beam_recall - 0.01;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "beam recall %.3f, pagesearch recall %.3f", run.beam_recall,
                run.page_recall);
  report(5, "search-accuracy", ok, buf);
}

TEST_CASE("criterion 6: ssd read reduction at matched recall") {
  const auto run = paired_beam_vs_page();
  const double ratio = run.page_reads / run.beam_reads;
  const bool ok = run.page_recall >= run.beam_recall - 0.01 && ratio <= 0.8;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean reads %.1f -> %.1f (ratio %.3f)", run.beam_reads,
                run.page_reads, ratio);
  report(6, "io-reduction", ok, buf);
}

TEST_CASE("criterion 7: query-sensitive entry reduces hops") {
  const auto& fx = fixture();
  Searcher searcher(*fx.rr_backend, fx.rr.codebook, fx.rr.codes, fx.rr.medoid,
                    &*fx.rr.entries);
  std::uint64_t medoid_total = 0, sensitive_total = 0;
  int strictly_fewer = 0;
  for (std::size_t qi = 0; qi < fx.queries.count(); ++qi) {
    const auto q = fx.queries.vec(static_cast<VertexId>(qi));
    const auto m = searcher.beamsearch(q, kParams, EntryStrategy::kMedoid);
    const auto s = searcher.beamsearch(q, kParams, EntryStrategy::kQuerySensitive);
    medoid_total += m.stats.hops;
    sensitive_total += s.stats.hops;
    if (s.stats.hops < m.stats.hops) ++strictly_fewer;
  }

  // Degenerate case: one cluster collapses the candidate list to the medoid,
  // so per-query hops must be identical.
  const auto vectors = fx.rr.load_vectors();
  const auto lone = minibatch_kmeans(vectors, 1, 256, 50, kEntrySeed);
  const auto lone_entries =
      gen_entry_candidates(fx.rr.graph, vectors, lone, 1, fx.rr.medoid, 128);
  Searcher degenerate(*fx.rr_backend, fx.rr.codebook, fx.rr.codes, fx.rr.medoid,
                      &lone_entries);
  bool identical = lone_entries.size() == 1;
  for (std::size_t qi = 0; qi < fx.queries.count() && identical; ++qi) {
    const auto q = fx.queries.vec(static_cast<VertexId>(qi));
    const auto m = degenerate.beamsearch(q, kParams, EntryStrategy::kMedoid);
    const auto s = degenerate.beamsearch(q, kParams, EntryStrategy::kQuerySensitive);
    identical = m.stats.hops == s.stats.hops;
  }

  const bool ok = sensitive_total <= medoid_total && strictly_fewer >= 30 && identical;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "mean hops %.2f -> %.2f, strictly fewer on %d/100, n_cluster=1 identical: %s",
                medoid_total / 100.0, sensitive_total / 100.0, strictly_fewer,
                identical ? "yes" : "no");
  report(7, "entry-hop-reduction", ok, buf);
}

TEST_CASE("criterion 8: merge quality against the optimal bin packing") {
  std::mt19937_64 rng(888);
  bool ok = true;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const std::uint32_t b = 3 + rng() % 6;
    const std::size_t items = 1 + rng() % 12;
    std::vector<std::uint32_t> sizes(items);
    for (auto& s : sizes) s = 1 + rng() % b;
    Layout temp;
    temp.page_capacity = b;
    VertexId next = 0;
    for (std::uint32_t size : sizes) {
      LogicalPage page;
      page.slots.assign(b, kPadId);
      page.valid_count = size;
      for (std::uint32_t s = 0; s < size; ++s) page.slots[s] = next++;
      temp.pages.push_back(std::move(page));
    }
    const auto merged = merge(temp, b);
    const std::size_t opt = test::optimal_bin_count(sizes, b);
    if (static_cast<double>(merged.layout.pages.size()) > (11.0 / 9.0) * opt + 1.0) ok = false;
    for (std::size_t p = 0; p + 1 < merged.layout.pages.size(); ++p) {
      if (merged.layout.pages[p].valid_count != b) ok = false;
    }
  }
  report(8, "ffd-merge-quality", ok);
}

TEST_CASE("criterion 9: zero-capacity pagesearch equals beamsearch") {
  const auto& fx = fixture();
  Searcher searcher(*fx.mapped_backend, fx.mapped.codebook, fx.mapped.codes, fx.mapped.medoid);
  PagesearchOptions off;
  off.heap_capacity = 0;
  bool ok = true;
  for (std::size_t qi = 0; qi < fx.queries.count() && ok; ++qi) {
    const auto q = fx.queries.vec(static_cast<VertexId>(qi));
    const auto beam = searcher.beamsearch(q, kParams);
    const auto page = searcher.pagesearch(q, kParams, EntryStrategy::kMedoid, off);
    ok = beam.ids == page.ids && beam.distances == page.distances;
  }
  report(9, "degenerate-equivalence", ok);
}

TEST_CASE("criterion 10: benchmark CSV is byte-identical across runs") {
  const auto& fx = fixture();
  std::vector<BenchConfig> configs;
  for (const auto* bundle : {&fx.rr, &fx.mapped}) {
    const auto* backend = bundle == &fx.rr ? fx.rr_backend.get() : fx.mapped_backend.get();
    const std::string name = bundle == &fx.rr ? "rr" : "mapped";
    for (const char* algo : {"beam", "page"}) {
      for (const char* entry : {"medoid", "sensitive"}) {
        configs.push_back({name + "/" + algo + "/" + entry, bundle, backend, algo, entry});
      }
    }
  }
  BenchOptions options;
  options.params = kParams;
  options.threads = 2;
  options.seed = 1;
  const auto run1 = run_bench(configs, fx.queries, fx.truth, options);
  const auto run2 = run_bench(configs, fx.queries, fx.truth, options);
  const bool ok = !run1.csv.empty() && run1.csv == run2.csv;
  report(10, "benchmark-determinism", ok);
}
