// Command-line front end: synthetic data generation, ingestion, index build,
// layout mapping, entry candidates, layout analysis, ground truth, single
// queries, and paired benchmarking.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "packann/bench.hpp"
#include "packann/bundle.hpp"
#include "packann/compactness.hpp"
#include "packann/dataset_io.hpp"
#include "packann/pipeline.hpp"
#include "packann/search.hpp"

namespace {

using namespace packann;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::unique_ptr<StorageBackend> open_backend(const std::string& kind,
                                             const std::filesystem::path& pages,
                                             const SimCosts& costs) {
  if (kind == "file") return std::make_unique<FileBackend>(pages);
  if (kind == "sim") return std::make_unique<SimBackend>(pages, costs);
  throw std::runtime_error("unknown backend: " + kind);
}

int run(int argc, char** argv) {
  CLI::App app{"packann: disk-resident graph ANN with page-locality mapping"};
  app.set_config("--config", "", "read options from an INI/TOML config file");
  app.require_subcommand(1);

  // --- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a clustered synthetic corpus");
  std::string gen_data = "data.fvecs", gen_queries;
  std::size_t gen_n = 20000, gen_dim = 16, gen_nq = 100;
  std::uint32_t gen_clusters = 50;
  std::uint64_t gen_seed = 0;
  float gen_std = 1.0f;
  std::uint32_t gen_intrinsic = 4;
  gen->add_option("--out-data", gen_data, "output fvecs path");
  gen->add_option("--out-queries", gen_queries, "optional query fvecs path");
  gen->add_option("--n", gen_n, "number of base vectors");
  gen->add_option("--dim", gen_dim, "dimensionality");
  gen->add_option("--clusters", gen_clusters, "number of Gaussian clusters");
  gen->add_option("--n-queries", gen_nq, "number of queries");
  gen->add_option("--cluster-std", gen_std, "per-cluster standard deviation");
  gen->add_option("--intrinsic-dim", gen_intrinsic,
                  "per-cluster intrinsic dimensionality (0 = isotropic)");
  gen->add_option("--seed", gen_seed, "RNG seed")->required();

  // --- ingest ------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "validate an fvecs corpus");
  std::string ingest_path, ingest_out;
  ingest->add_option("--data", ingest_path, "fvecs input")->required();
  ingest->add_option("--out", ingest_out, "optional rewritten copy");

  // --- build -------------------------------------------------------------
  auto* build = app.add_subcommand("build", "build graph + PQ, write a round-robin bundle");
  std::string build_data, build_out;
  BuildConfig build_config;
  build->add_option("--data", build_data, "fvecs input")->required();
  build->add_option("--out-dir", build_out, "bundle directory")->required();
  build->add_option("-R,--max-degree", build_config.build.max_degree, "graph out-degree bound");
  build->add_option("-L,--l-build", build_config.build.build_width, "build candidate width");
  build->add_option("--alpha1", build_config.build.alpha1, "first-pass pruning slack");
  build->add_option("--alpha2", build_config.build.alpha2, "second-pass pruning slack");
  std::uint64_t pq_budget = 0;
  build->add_option("--pq-m", build_config.pq_chunks, "PQ chunks (0 = dim/4)");
  build->add_option("--pq-budget-bytes", pq_budget,
                    "cap PQ chunks so the code array fits this many bytes (0 = no cap)");
  build->add_option("--pq-iters", build_config.pq_iters, "PQ k-means iterations");
  build->add_option("--page-size", build_config.page_size, "page size in bytes")
      ->envname("PACKANN_PAGE_SIZE");
  build->add_option("--seed", build_config.seed, "build seed")->required();

  // --- map ---------------------------------------------------------------
  auto* map_cmd = app.add_subcommand("map", "pack-merge an existing bundle");
  std::string map_in, map_out, map_order = "pq";
  map_cmd->add_option("--in-dir", map_in, "input bundle")->required();
  map_cmd->add_option("--out-dir", map_out, "output bundle")->required();
  map_cmd->add_option("--order", map_order, "neighbor ordering: pq | exact")
      ->check(CLI::IsMember({"pq", "exact"}));

  // --- entries -----------------------------------------------------------
  auto* entries_cmd = app.add_subcommand("entries", "generate entry vertex candidates");
  std::string entries_bundle;
  std::uint32_t n_cluster = 64, entries_batch = 256, entries_iters = 50, entries_width = 0;
  std::uint64_t entries_seed = 0;
  entries_cmd->add_option("--bundle", entries_bundle, "bundle directory")->required();
  entries_cmd->add_option("--n-cluster", n_cluster, "number of clusters");
  entries_cmd->add_option("--batch-size", entries_batch, "mini-batch size");
  entries_cmd->add_option("--iters", entries_iters, "mini-batch iterations");
  entries_cmd->add_option("--search-width", entries_width, "top-1 search width (0 = build L)");
  entries_cmd->add_option("--seed", entries_seed, "clustering seed")->required();

  // --- analyze -----------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "per-page compactness report");
  std::string analyze_bundle, analyze_csv, analyze_json;
  int analyze_threads = 0;
  analyze->add_option("--bundle", analyze_bundle, "bundle directory")->required();
  analyze->add_option("--out-csv", analyze_csv, "per-page CSV path");
  analyze->add_option("--out-json", analyze_json, "summary JSON path");
  analyze->add_option("--threads", analyze_threads, "worker threads (0 = auto)");

  // --- groundtruth ---------------------------------------------------------
  auto* gt_cmd = app.add_subcommand("groundtruth", "exact brute-force top-k");
  std::string gt_data, gt_queries, gt_out;
  std::uint32_t gt_k = 10;
  int gt_threads = 0;
  gt_cmd->add_option("--data", gt_data, "fvecs corpus")->required();
  gt_cmd->add_option("--queries", gt_queries, "fvecs queries")->required();
  gt_cmd->add_option("-k", gt_k, "neighbors per query");
  gt_cmd->add_option("--out", gt_out, "ivecs output")->required();
  gt_cmd->add_option("--threads", gt_threads, "worker threads (0 = auto)");

  // --- query / bench shared knobs ----------------------------------------
  SearchParams params;
  params.beam = 4;
  params.search_width = 100;
  params.k = 10;
  PagesearchOptions page_options;
  SimCosts sim_costs;
  std::string backend_kind = "sim";

  auto add_search_options = [&](CLI::App* cmd) {
    cmd->add_option("-B,--beam", params.beam, "beam width");
    cmd->add_option("--search-width", params.search_width, "candidate list width L_s");
    cmd->add_option("-k", params.k, "results per query");
    cmd->add_option("--backend", backend_kind, "storage backend: sim | file")
        ->envname("PACKANN_BACKEND")
        ->check(CLI::IsMember({"sim", "file"}));
    cmd->add_option("--heap-capacity", page_options.heap_capacity,
                    "page heap pool capacity (0 disables)");
    cmd->add_option("--sim-page-cost", sim_costs.per_page, "simulator per-page cost units");
    cmd->add_option("--sim-batch-cost", sim_costs.per_batch, "simulator per-batch cost units");
  };

  // --- query ---------------------------------------------------------------
  auto* query_cmd = app.add_subcommand("query", "run queries against one bundle");
  std::string query_bundle, query_queries, query_algo = "beam", query_entry = "medoid";
  std::string query_out;
  query_cmd->add_option("--bundle", query_bundle, "bundle directory")->required();
  query_cmd->add_option("--queries", query_queries, "fvecs queries")->required();
  query_cmd->add_option("--algo", query_algo, "beam | page")
      ->check(CLI::IsMember({"beam", "page"}));
  query_cmd->add_option("--entry", query_entry, "medoid | sensitive")
      ->check(CLI::IsMember({"medoid", "sensitive"}));
  query_cmd->add_option("--out", query_out, "ivecs of original-id results");
  add_search_options(query_cmd);

  // --- bench ---------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "paired benchmark across configurations");
  std::vector<std::string> bench_bundles;
  std::string bench_queries, bench_gt, bench_algos = "beam,page", bench_entries = "medoid";
  std::string bench_csv = "bench.csv", bench_json = "bench.json";
  int bench_threads = 0;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--bundle", bench_bundles, "name=dir (repeatable)")->required();
  bench_cmd->add_option("--queries", bench_queries, "fvecs queries")->required();
  bench_cmd->add_option("--gt", bench_gt, "ivecs ground truth")->required();
  bench_cmd->add_option("--algos", bench_algos, "comma list of beam,page");
  bench_cmd->add_option("--entries", bench_entries, "comma list of medoid,sensitive");
  bench_cmd->add_option("--out-csv", bench_csv, "per-query CSV output");
  bench_cmd->add_option("--out-json", bench_json, "summary JSON output");
  bench_cmd->add_option("--threads", bench_threads, "query-level threads (0 = auto)");
  bench_cmd->add_option("--seed", bench_seed, "recorded run seed")->required();
  add_search_options(bench_cmd);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const ClusterModel model =
        make_cluster_model(gen_dim, gen_clusters, gen_seed, 50.0f, gen_intrinsic, gen_std);
    const auto data = sample_clusters(model, gen_n, gen_seed + 1);
    write_fvecs(data, gen_data);
    std::cout << "wrote " << gen_n << " x " << gen_dim << " vectors to " << gen_data << "\n";
    if (!gen_queries.empty()) {
      const auto queries = sample_clusters(model, gen_nq, gen_seed + 2);
      write_fvecs(queries, gen_queries);
      std::cout << "wrote " << gen_nq << " queries to " << gen_queries << "\n";
    }
    return 0;
  }

  if (ingest->parsed()) {
    const auto data = read_fvecs(ingest_path);
    data.check_valid();
    nlohmann::json j{{"count", data.count()}, {"dim", data.dim()}};
    std::cout << j.dump() << "\n";
    if (!ingest_out.empty()) write_fvecs(data, ingest_out);
    return 0;
  }

  if (build->parsed()) {
    const auto data = read_fvecs(build_data);
    if (pq_budget > 0) {
      std::uint32_t m = build_config.pq_chunks
                            ? build_config.pq_chunks
                            : default_pq_chunks(static_cast<std::uint32_t>(data.dim()));
      while (m > 1 && static_cast<std::uint64_t>(m) * data.count() > pq_budget) --m;
      while (data.dim() % m != 0) --m;
      build_config.pq_chunks = m;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const IndexBundle bundle = build_bundle(data, build_out, build_config);
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::cout << "bundle " << build_out << ": N=" << bundle.params.count
              << " R=" << bundle.params.max_degree << " b=" << bundle.params.blocks_per_page
              << " medoid=" << bundle.medoid << " (" << secs.count() << "s)\n";
    return 0;
  }

  if (map_cmd->parsed()) {
    const IndexBundle input = load_bundle(map_in);
    const PackOrder order =
        map_order == "exact" ? PackOrder::kExactDistance : PackOrder::kPqDistance;
    const IndexBundle mapped = map_bundle(input, map_out, order);
    std::cout << "mapped bundle " << map_out << ": medoid=" << mapped.medoid << "\n";
    return 0;
  }

  if (entries_cmd->parsed()) {
    IndexBundle bundle = load_bundle(entries_bundle);
    add_entries(bundle, n_cluster, entries_batch, entries_iters, entries_seed, entries_width);
    std::cout << "entry candidates: " << bundle.entries->size() << " (n_cluster=" << n_cluster
              << ")\n";
    return 0;
  }

  if (analyze->parsed()) {
    const IndexBundle bundle = load_bundle(analyze_bundle);
    const Layout layout = dense_layout(bundle.params.count, bundle.params.blocks_per_page);
    const auto report = layout_report(bundle.graph, layout, analyze_threads);
    if (!analyze_csv.empty()) write_text(analyze_csv, report_csv(report));
    const std::string summary = report_summary_json(report);
    if (!analyze_json.empty()) write_text(analyze_json, summary + "\n");
    std::cout << summary << "\n";
    return 0;
  }

  if (gt_cmd->parsed()) {
    const auto data = read_fvecs(gt_data);
    const auto queries = read_fvecs(gt_queries);
    const auto truth = ground_truth(data, queries, gt_k, gt_threads);
    write_ivecs(truth, gt_out);
    std::cout << "wrote ground truth for " << truth.size() << " queries to " << gt_out << "\n";
    return 0;
  }

  if (query_cmd->parsed()) {
    const IndexBundle bundle = load_bundle(query_bundle);
    const auto queries = read_fvecs(query_queries);
    const auto backend = open_backend(backend_kind, bundle.dir / "pages.bin", sim_costs);
    Searcher searcher(*backend, bundle.codebook, bundle.codes, bundle.medoid,
                      bundle.entries ? &*bundle.entries : nullptr);
    const EntryStrategy strategy = query_entry == "sensitive" ? EntryStrategy::kQuerySensitive
                                                              : EntryStrategy::kMedoid;
    std::vector<std::vector<VertexId>> results;
    std::uint64_t reads = 0, hops = 0, hits = 0;
    for (std::size_t qi = 0; qi < queries.count(); ++qi) {
      const QueryOutcome outcome =
          query_algo == "beam"
              ? searcher.beamsearch(queries.vec(static_cast<VertexId>(qi)), params, strategy)
              : searcher.pagesearch(queries.vec(static_cast<VertexId>(qi)), params, strategy,
                                    page_options);
      std::vector<VertexId> original;
      original.reserve(outcome.ids.size());
      for (VertexId id : outcome.ids) original.push_back(bundle.inverse[id]);
      results.push_back(std::move(original));
      reads += outcome.stats.ssd_page_reads;
      hops += outcome.stats.hops;
      hits += outcome.stats.cache_hits;
    }
    const double n = static_cast<double>(queries.count());
    nlohmann::json j{{"queries", queries.count()},
                     {"mean_ssd_page_reads", reads / n},
                     {"mean_hops", hops / n},
                     {"mean_cache_hits", hits / n}};
    std::cout << j.dump() << "\n";
    if (!query_out.empty()) write_ivecs(results, query_out);
    return 0;
  }

  if (bench_cmd->parsed()) {
    const auto queries = read_fvecs(bench_queries);
    const auto truth = read_ivecs(bench_gt);

    std::vector<std::pair<std::string, IndexBundle>> bundles;
    std::vector<std::unique_ptr<StorageBackend>> backends;
    for (const std::string& spec : bench_bundles) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw std::runtime_error("--bundle expects name=dir");
      bundles.emplace_back(spec.substr(0, eq), load_bundle(spec.substr(eq + 1)));
    }
    auto split_csv = [](const std::string& s) {
      std::vector<std::string> out;
      std::size_t start = 0;
      while (start <= s.size()) {
        const auto comma = s.find(',', start);
        out.push_back(s.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return out;
    };

    std::vector<BenchConfig> configs;
    for (auto& [name, bundle] : bundles) {
      backends.push_back(open_backend(backend_kind, bundle.dir / "pages.bin", sim_costs));
      for (const std::string& algo : split_csv(bench_algos)) {
        for (const std::string& entry : split_csv(bench_entries)) {
          configs.push_back(
              {name + "/" + algo + "/" + entry, &bundle, backends.back().get(), algo, entry});
        }
      }
    }
    BenchOptions options;
    options.params = params;
    options.page_options = page_options;
    options.wall_clock_cost = backend_kind == "file";
    options.threads = bench_threads;
    options.seed = bench_seed;
    const BenchOutput output = run_bench(configs, queries, truth, options);
    write_text(bench_csv, output.csv);
    write_text(bench_json, output.summary_json + "\n");
    std::cout << output.summary_json << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
