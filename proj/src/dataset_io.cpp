#include "packann/dataset_io.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "packann/quantization.hpp"

namespace packann {

VectorDataset read_fvecs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<float> data;
  std::int32_t dim = 0;
  std::size_t record = 0;
  while (true) {
    std::int32_t record_dim = 0;
    in.read(reinterpret_cast<char*>(&record_dim), sizeof(record_dim));
    if (in.eof()) break;
    if (!in) throw std::runtime_error("fvecs: truncated header of record " +
                                      std::to_string(record) + " in " + path.string());
    if (record_dim <= 0) {
      throw std::runtime_error("fvecs: non-positive dim in record " + std::to_string(record));
    }
    if (record == 0) {
      dim = record_dim;
    } else if (record_dim != dim) {
      throw std::runtime_error("fvecs: record " + std::to_string(record) + " has dim " +
                               std::to_string(record_dim) + ", expected " +
                               std::to_string(dim));
    }
    const std::size_t offset = data.size();
    data.resize(offset + static_cast<std::size_t>(record_dim));
    in.read(reinterpret_cast<char*>(data.data() + offset),
            static_cast<std::streamsize>(record_dim * sizeof(float)));
    if (!in) {
      throw std::runtime_error("fvecs: truncated record " + std::to_string(record) + " in " +
                               path.string());
    }
    ++record;
  }
  if (record == 0) throw std::runtime_error("fvecs: empty file " + path.string());
  return VectorDataset(static_cast<std::size_t>(dim), std::move(data));
}

void write_fvecs(const VectorDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  const std::int32_t dim = static_cast<std::int32_t>(data.dim());
  for (std::size_t i = 0; i < data.count(); ++i) {
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    const auto v = data.vec(static_cast<VertexId>(i));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::vector<VertexId>> read_ivecs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::vector<VertexId>> rows;
  while (true) {
    std::int32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (in.eof()) break;
    if (!in || count < 0) {
      throw std::runtime_error("ivecs: corrupt record " + std::to_string(rows.size()));
    }
    std::vector<VertexId> row(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(VertexId)));
    if (!in) throw std::runtime_error("ivecs: truncated record " + std::to_string(rows.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ivecs(const std::vector<std::vector<VertexId>>& rows,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const auto& row : rows) {
    const std::int32_t count = static_cast<std::int32_t>(row.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(VertexId)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<float> make_cluster_centers(std::size_t dim, std::uint32_t n_clusters,
                                        std::uint64_t seed, float box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uniform(-box, box);
  std::vector<float> centers(static_cast<std::size_t>(n_clusters) * dim);
  for (float& c : centers) c = uniform(rng);
  return centers;
}

ClusterModel make_cluster_model(std::size_t dim, std::uint32_t n_clusters, std::uint64_t seed,
                                float box, std::uint32_t intrinsic_dim, float cluster_std) {
  ClusterModel model;
  model.dim = dim;
  model.n_clusters = n_clusters;
  model.intrinsic_dim = intrinsic_dim;
  model.cluster_std = cluster_std;
  model.centers = make_cluster_centers(dim, n_clusters, seed, box);
  if (intrinsic_dim > 0 && intrinsic_dim < dim) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    model.bases.resize(static_cast<std::size_t>(n_clusters) * dim * intrinsic_dim);
    for (float& b : model.bases) b = gauss(rng);
  } else {
    model.intrinsic_dim = 0;
  }
  return model;
}

VectorDataset sample_clusters(const ClusterModel& model, std::size_t count,
                              std::uint64_t seed) {
  if (model.intrinsic_dim == 0) {
    return sample_around_centers(model.centers, model.dim, count, seed, model.cluster_std);
  }
  const std::size_t dim = model.dim;
  const std::uint32_t k = model.intrinsic_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  const float scale = model.cluster_std / std::sqrt(static_cast<float>(k));
  const float jitter = 0.05f * model.cluster_std;
  std::vector<float> data(count * dim);
  std::vector<float> z(k);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = i % model.n_clusters;
    const float* center = model.centers.data() + c * dim;
    const float* basis = model.bases.data() + c * dim * k;
    for (std::uint32_t j = 0; j < k; ++j) z[j] = gauss(rng) * scale;
    for (std::size_t d = 0; d < dim; ++d) {
      float x = center[d];
      for (std::uint32_t j = 0; j < k; ++j) x += basis[d * k + j] * z[j];
      data[i * dim + d] = x + jitter * gauss(rng);
    }
  }
  return VectorDataset(dim, std::move(data));
}

VectorDataset sample_around_centers(std::span<const float> centers, std::size_t dim,
                                    std::size_t count, std::uint64_t seed,
                                    float cluster_std) {
  const std::size_t n_clusters = centers.size() / dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, cluster_std);
  std::vector<float> data(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const float* center = centers.data() + (i % n_clusters) * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      data[i * dim + j] = center[j] + noise(rng);
    }
  }
  return VectorDataset(dim, std::move(data));
}

VectorDataset make_clustered(std::size_t count, std::size_t dim, std::uint32_t n_clusters,
                             std::uint64_t seed, float box, float cluster_std) {
  const auto centers = make_cluster_centers(dim, n_clusters, seed, box);
  return sample_around_centers(centers, dim, count, seed + 1, cluster_std);
}

std::vector<std::vector<VertexId>> ground_truth(const VectorDataset& data,
                                                const VectorDataset& queries, std::uint32_t k,
                                                int threads) {
  if (data.dim() != queries.dim()) {
    throw std::invalid_argument("ground_truth: dimension mismatch");
  }
  if (k < 1 || k > data.count()) {
    throw std::invalid_argument("ground_truth: k out of range");
  }
  const std::int64_t nq = static_cast<std::int64_t>(queries.count());
  std::vector<std::vector<VertexId>> truth(queries.count());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::int64_t qi = 0; qi < nq; ++qi) {
    const auto q = queries.vec(static_cast<VertexId>(qi));
    // Bounded max-heap of the best k seen so far, worst on top.
    std::vector<std::pair<float, VertexId>> heap;
    heap.reserve(k + 1);
    auto cmp = [](const auto& a, const auto& b) { return a < b; };
    for (std::size_t i = 0; i < data.count(); ++i) {
      const float d = exact_distance_sq(q, data.vec(static_cast<VertexId>(i)));
      const std::pair<float, VertexId> entry{d, static_cast<VertexId>(i)};
      if (heap.size() < k) {
        heap.push_back(entry);
        std::push_heap(heap.begin(), heap.end(), cmp);
      } else if (entry < heap.front()) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        heap.back() = entry;
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    }
    std::sort(heap.begin(), heap.end());
    auto& row = truth[static_cast<std::size_t>(qi)];
    row.reserve(k);
    for (const auto& [d, id] : heap) row.push_back(id);
  }
  return truth;
}

double recall_at_k(std::span<const VertexId> result, std::span<const VertexId> truth,
                   std::uint32_t k) {
  if (result.size() != k || truth.size() != k) {
    throw std::invalid_argument("recall_at_k: lists must both have exactly k entries");
  }
  std::vector<VertexId> a(result.begin(), result.end());
  std::vector<VertexId> b(truth.begin(), truth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<VertexId> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(k);
}

}  // namespace packann
