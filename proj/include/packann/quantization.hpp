#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "packann/core.hpp"

namespace packann {

/// Unsquared Euclidean distance. Throws std::invalid_argument on dim mismatch.
float exact_distance(std::span<const float> x, std::span<const float> y);

/// Squared Euclidean distance, same dim contract. All PQ-side distances use
/// the squared convention (ranking-equivalent, no sqrt in hot loops);
/// exact_distance above is the unsquared one used for result ordering.
float exact_distance_sq(std::span<const float> x, std::span<const float> y);

/// Product-quantization codebook: M chunks, 256 pivots each, chunk width
/// dim/M. Centroids stored row-major as [chunk][pivot][component].
struct PQCodebook {
  static constexpr std::uint32_t kPivots = 256;

  std::uint32_t num_chunks = 0;  // M, must divide dim
  std::uint32_t dim = 0;
  std::vector<float> centroids;  // M * 256 * (dim/M)

  std::uint32_t chunk_dim() const { return dim / num_chunks; }
  const float* centroid(std::uint32_t chunk, std::uint32_t pivot) const {
    return centroids.data() +
           (static_cast<std::size_t>(chunk) * kPivots + pivot) * chunk_dim();
  }

  void save(const std::string& path) const;
  static PQCodebook load(const std::string& path);
};

struct PQCode {
  std::vector<std::uint8_t> codes;  // one pivot index per chunk
};

/// Flat code array for a whole dataset, indexed by vertex id.
struct PQCodes {
  std::uint32_t num_chunks = 0;
  std::vector<std::uint8_t> codes;  // count * M

  std::size_t count() const { return num_chunks ? codes.size() / num_chunks : 0; }
  std::span<const std::uint8_t> code(VertexId id) const {
    return {codes.data() + static_cast<std::size_t>(id) * num_chunks, num_chunks};
  }

  void save(const std::string& path) const;
  static PQCodes load(const std::string& path);
};

/// Per-query asymmetric distance table: table[m][c] is the squared distance
/// from the query's m-th chunk to pivot c of that chunk.
struct AdcTable {
  std::uint32_t num_chunks = 0;
  std::vector<float> table;  // M * 256

  float at(std::uint32_t chunk, std::uint32_t pivot) const {
    return table[static_cast<std::size_t>(chunk) * PQCodebook::kPivots + pivot];
  }
};

/// Per-chunk k-means with 256 pivots, deterministic for a given seed.
/// Initial pivots are a seeded distinct sample of the data (cycled when
/// count < 256); empty clusters are re-seeded from the farthest point.
PQCodebook train_pq(const VectorDataset& data, std::uint32_t num_chunks,
                    std::uint32_t iters, std::uint64_t seed);

/// Nearest pivot per chunk; ties resolve to the lowest pivot index.
PQCode encode(const PQCodebook& codebook, std::span<const float> vec);

PQCodes encode_all(const PQCodebook& codebook, const VectorDataset& data);

AdcTable adc_table(const PQCodebook& codebook, std::span<const float> query);

/// Squared-L2 PQ distance: sum over chunks of table[m][code[m]].
inline float pq_distance(const AdcTable& table, std::span<const std::uint8_t> code) {
  float sum = 0.0f;
  for (std::uint32_t m = 0; m < table.num_chunks; ++m) sum += table.at(m, code[m]);
  return sum;
}

/// Reconstruction of a code back to a full vector (test and tooling aid).
std::vector<float> reconstruct(const PQCodebook& codebook, std::span<const std::uint8_t> code);

}  // namespace packann
