#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "packann/bundle.hpp"
#include "packann/core.hpp"
#include "packann/search.hpp"

namespace packann {

struct BenchConfig {
  std::string name;  // "<bundle>/<algo>/<entry>"
  const IndexBundle* bundle = nullptr;
  const StorageBackend* backend = nullptr;
  std::string algo;   // "beam" | "page"
  std::string entry;  // "medoid" | "sensitive"
};

struct BenchRecord {
  std::uint32_t query_id = 0;
  double recall = 0.0;
  std::uint64_t ssd_page_reads = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t hops = 0;
  std::uint64_t cost = 0;  // sim cost units, or wall-clock micros on file
  std::uint64_t reads_approach = 0;
  std::uint64_t reads_refine = 0;
};

struct BenchOptions {
  SearchParams params;
  PagesearchOptions page_options;
  bool wall_clock_cost = false;  // true on the file backend
  int threads = 0;               // query-level parallelism; 0 = OpenMP default
  std::uint64_t seed = 0;        // recorded in the summary
};

struct BenchOutput {
  std::vector<std::pair<std::string, std::vector<BenchRecord>>> per_config;
  std::string csv;
  std::string summary_json;
};

/// Runs every configuration over the same queries in the same order; records
/// are merged by query index so the CSV is byte-stable on the simulator
/// backend. Ground truth rows are in original-dataset id space; bundle result
/// ids are translated back through the bundle's inverse mapping.
BenchOutput run_bench(const std::vector<BenchConfig>& configs, const VectorDataset& queries,
                      const std::vector<std::vector<VertexId>>& truth,
                      const BenchOptions& options);

/// Reads attributed to the refine phase: all reads from the first hop whose
/// end-of-hop worst result-set member is already in the final top-k.
std::pair<std::uint64_t, std::uint64_t> split_reads_by_phase(const QueryOutcome& outcome);

}  // namespace packann
