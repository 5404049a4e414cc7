#include "packann/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "packann/dataset_io.hpp"

namespace packann {

std::pair<std::uint64_t, std::uint64_t> split_reads_by_phase(const QueryOutcome& outcome) {
  std::unordered_set<VertexId> final_ids(outcome.ids.begin(), outcome.ids.end());
  std::size_t refine_from = outcome.reads_per_hop.size();
  for (std::size_t h = 0; h < outcome.worst_per_hop.size(); ++h) {
    const VertexId worst = outcome.worst_per_hop[h];
    if (worst != kPadId && final_ids.count(worst)) {
      refine_from = h;
      break;
    }
  }
  std::uint64_t approach = 0, refine = 0;
  for (std::size_t h = 0; h < outcome.reads_per_hop.size(); ++h) {
    (h < refine_from ? approach : refine) += outcome.reads_per_hop[h];
  }
  return {approach, refine};
}

namespace {

BenchRecord make_record(std::uint32_t qi, const QueryOutcome& outcome,
                        const IndexBundle& bundle, std::span<const VertexId> truth_row,
                        std::uint32_t k, std::uint64_t wall_micros, bool wall_clock_cost) {
  BenchRecord rec;
  rec.query_id = qi;
  std::vector<VertexId> original_ids;
  original_ids.reserve(outcome.ids.size());
  for (VertexId id : outcome.ids) original_ids.push_back(bundle.inverse[id]);
  rec.recall = recall_at_k(original_ids, truth_row, k);
  rec.ssd_page_reads = outcome.stats.ssd_page_reads;
  rec.cache_hits = outcome.stats.cache_hits;
  rec.hops = outcome.stats.hops;
  rec.cost = wall_clock_cost ? wall_micros : outcome.cost_units;
  const auto [approach, refine] = split_reads_by_phase(outcome);
  rec.reads_approach = approach;
  rec.reads_refine = refine;
  return rec;
}

}  // namespace

BenchOutput run_bench(const std::vector<BenchConfig>& configs, const VectorDataset& queries,
                      const std::vector<std::vector<VertexId>>& truth,
                      const BenchOptions& options) {
  options.params.check_valid();
  if (truth.size() != queries.count()) {
    throw std::invalid_argument("run_bench: ground truth row count mismatch");
  }
  for (const auto& row : truth) {
    if (row.size() != options.params.k) {
      throw std::invalid_argument("run_bench: ground truth k mismatch");
    }
  }

  BenchOutput out;
  const std::int64_t nq = static_cast<std::int64_t>(queries.count());
  std::vector<double> wall_seconds;

  for (const BenchConfig& config : configs) {
    if (config.algo != "beam" && config.algo != "page") {
      throw std::invalid_argument("run_bench: unknown algorithm " + config.algo);
    }
    const EntryStrategy strategy = config.entry == "sensitive"
                                       ? EntryStrategy::kQuerySensitive
                                       : EntryStrategy::kMedoid;
    const IndexBundle& bundle = *config.bundle;
    Searcher searcher(*config.backend, bundle.codebook, bundle.codes, bundle.medoid,
                      bundle.entries ? &*bundle.entries : nullptr);
    std::vector<BenchRecord> records(queries.count());
    const auto batch_start = std::chrono::steady_clock::now();

#pragma omp parallel for schedule(dynamic, 1) num_threads(options.threads > 0 ? options.threads : omp_get_max_threads())
    for (std::int64_t qi = 0; qi < nq; ++qi) {
      const auto q = queries.vec(static_cast<VertexId>(qi));
      const auto start = std::chrono::steady_clock::now();
      const QueryOutcome outcome =
          config.algo == "beam"
              ? searcher.beamsearch(q, options.params, strategy)
              : searcher.pagesearch(q, options.params, strategy, options.page_options);
      const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      records[static_cast<std::size_t>(qi)] = make_record(
          static_cast<std::uint32_t>(qi), outcome, bundle,
          truth[static_cast<std::size_t>(qi)], options.params.k,
          static_cast<std::uint64_t>(micros), options.wall_clock_cost);
    }
    wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - batch_start).count());
    out.per_config.emplace_back(config.name, std::move(records));
  }

  std::ostringstream csv;
  csv << "config,query_id,recall_at_k,ssd_page_reads,cache_hits,hops,cost_units,"
         "reads_approach,reads_refine\n";
  char buf[64];
  for (const auto& [name, records] : out.per_config) {
    for (const BenchRecord& r : records) {
      std::snprintf(buf, sizeof(buf), "%.6f", r.recall);
      csv << name << ',' << r.query_id << ',' << buf << ',' << r.ssd_page_reads << ','
          << r.cache_hits << ',' << r.hops << ',' << r.cost << ',' << r.reads_approach << ','
          << r.reads_refine << '\n';
    }
  }
  out.csv = csv.str();

  nlohmann::json summary;
  summary["schema"] = 1;
  summary["k"] = options.params.k;
  summary["beam"] = options.params.beam;
  summary["search_width"] = options.params.search_width;
  summary["n_queries"] = queries.count();
  summary["seed"] = options.seed;
  summary["configs"] = nlohmann::json::array();
  std::size_t config_index = 0;
  for (const auto& [name, records] : out.per_config) {
    double recall = 0, reads = 0, hits = 0, hops = 0, cost = 0, approach = 0, refine = 0;
    for (const BenchRecord& r : records) {
      recall += r.recall;
      reads += static_cast<double>(r.ssd_page_reads);
      hits += static_cast<double>(r.cache_hits);
      hops += static_cast<double>(r.hops);
      cost += static_cast<double>(r.cost);
      approach += static_cast<double>(r.reads_approach);
      refine += static_cast<double>(r.reads_refine);
    }
    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    nlohmann::json c;
    c["config"] = name;
    c["mean_recall"] = recall / n;
    c["mean_ssd_page_reads"] = reads / n;
    c["mean_cache_hits"] = hits / n;
    c["mean_hops"] = hops / n;
    c["mean_cost_units"] = cost / n;
    c["mean_reads_approach"] = approach / n;
    c["mean_reads_refine"] = refine / n;
    // Wall-clock throughput is only meaningful against the real file backend;
    // the simulator reports cost units instead.
    if (options.wall_clock_cost && wall_seconds[config_index] > 0.0) {
      c["qps"] = n / wall_seconds[config_index];
    }
    summary["configs"].push_back(c);
    ++config_index;
  }
  out.summary_json = summary.dump(2);
  return out;
}

}  // namespace packann
