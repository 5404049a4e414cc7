#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "packann/core.hpp"

namespace packann {

/// Reads an fvecs file (per record: int32 dim, then dim float32). Throws with
/// the offending record index on dimension mismatch or truncation.
VectorDataset read_fvecs(const std::filesystem::path& path);

void write_fvecs(const VectorDataset& data, const std::filesystem::path& path);

/// ivecs: per record int32 count then count int32 ids.
std::vector<std::vector<VertexId>> read_ivecs(const std::filesystem::path& path);

void write_ivecs(const std::vector<std::vector<VertexId>>& rows,
                 const std::filesystem::path& path);

/// Deterministic Gaussian cluster centers, uniform in [-box, box]^dim.
std::vector<float> make_cluster_centers(std::size_t dim, std::uint32_t n_clusters,
                                        std::uint64_t seed, float box = 50.0f);

/// Gaussian mixture description. When intrinsic_dim is nonzero each cluster
/// is a degenerate Gaussian spanned by its own random basis of that rank
/// (plus a small full-dimensional jitter), which mimics the low local
/// intrinsic dimensionality of real embedding corpora.
struct ClusterModel {
  std::size_t dim = 0;
  std::uint32_t n_clusters = 0;
  std::uint32_t intrinsic_dim = 0;  // 0 = isotropic
  float cluster_std = 1.0f;
  std::vector<float> centers;  // n_clusters * dim
  std::vector<float> bases;    // n_clusters * dim * intrinsic_dim
};

ClusterModel make_cluster_model(std::size_t dim, std::uint32_t n_clusters, std::uint64_t seed,
                                float box = 50.0f, std::uint32_t intrinsic_dim = 0,
                                float cluster_std = 1.0f);

/// Points sampled from the model, round-robin over clusters.
VectorDataset sample_clusters(const ClusterModel& model, std::size_t count,
                              std::uint64_t seed);

/// Points sampled around the given isotropic centers (round-robin over
/// clusters, Gaussian with the given standard deviation).
VectorDataset sample_around_centers(std::span<const float> centers, std::size_t dim,
                                    std::size_t count, std::uint64_t seed,
                                    float cluster_std = 1.0f);

/// Clustered synthetic corpus: centers from `seed`, points from `seed + 1`.
VectorDataset make_clustered(std::size_t count, std::size_t dim, std::uint32_t n_clusters,
                             std::uint64_t seed, float box = 50.0f, float cluster_std = 1.0f);

/// Exact brute-force top-k per query (ties to the lower id), parallel over
/// queries. This is the oracle behind every recall number.
/// threads == 0 uses the OpenMP default.
std::vector<std::vector<VertexId>> ground_truth(const VectorDataset& data,
                                                const VectorDataset& queries, std::uint32_t k,
                                                int threads = 0);

/// |result ∩ truth| / k. Both lists must have exactly k entries.
double recall_at_k(std::span<const VertexId> result, std::span<const VertexId> truth,
                   std::uint32_t k);

}  // namespace packann
