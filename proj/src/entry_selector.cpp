#include "packann/entry_selector.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "packann/quantization.hpp"
#include "packann/serialize.hpp"

namespace packann {

namespace {
constexpr std::uint32_t kEntriesMagic = 0x56454B50;  // "PKEV"
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

std::vector<float> minibatch_kmeans(const VectorDataset& data, std::uint32_t n_cluster,
                                    std::uint32_t batch_size, std::uint32_t iters,
                                    std::uint64_t seed) {
  const std::size_t n = data.count();
  const std::size_t dim = data.dim();
  if (n_cluster == 0 || n_cluster > n) {
    throw std::invalid_argument("minibatch_kmeans: n_cluster must be in [1, count]");
  }
  if (batch_size == 0) throw std::invalid_argument("minibatch_kmeans: empty batch");

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<float> centroids(static_cast<std::size_t>(n_cluster) * dim);
  for (std::uint32_t c = 0; c < n_cluster; ++c) {
    const auto v = data.vec(perm[c]);
    std::copy(v.begin(), v.end(), centroids.begin() + static_cast<std::size_t>(c) * dim);
  }

  std::vector<std::uint64_t> assign_count(n_cluster, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint32_t it = 0; it < iters; ++it) {
    for (std::uint32_t bi = 0; bi < batch_size; ++bi) {
      const auto x = data.vec(static_cast<VertexId>(pick(rng)));
      std::uint32_t best = 0;
      float best_d = exact_distance_sq(x, {centroids.data(), dim});
      for (std::uint32_t c = 1; c < n_cluster; ++c) {
        const float d = exact_distance_sq(
            x, {centroids.data() + static_cast<std::size_t>(c) * dim, dim});
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      ++assign_count[best];
      const float eta = 1.0f / static_cast<float>(assign_count[best]);
      float* ctr = centroids.data() + static_cast<std::size_t>(best) * dim;
      for (std::size_t j = 0; j < dim; ++j) ctr[j] += eta * (x[j] - ctr[j]);
    }
  }
  return centroids;
}

EntryCandidates gen_entry_candidates(const GraphIndex& graph, const VectorDataset& data,
                                     std::span<const float> centroids,
                                     std::uint32_t n_cluster, VertexId medoid,
                                     std::uint32_t search_width) {
  const std::size_t dim = data.dim();
  if (centroids.size() != static_cast<std::size_t>(n_cluster) * dim) {
    throw std::invalid_argument("gen_entry_candidates: centroid buffer size mismatch");
  }
  EntryCandidates out;
  out.dim = static_cast<std::uint32_t>(dim);
  out.n_cluster = n_cluster;
  out.medoid = medoid;

  std::unordered_set<VertexId> seen;
  auto add = [&](VertexId v) {
    if (!seen.insert(v).second) return;
    out.ids.push_back(v);
    const auto vec = data.vec(v);
    out.vectors.insert(out.vectors.end(), vec.begin(), vec.end());
  };
  if (n_cluster == 1) {
    // Degenerate case: the lone cluster is the whole dataset and its
    // representative is the central vertex itself, so selection reduces to
    // the static entry strategy.
    add(medoid);
    return out;
  }
  for (std::uint32_t c = 0; c < n_cluster; ++c) {
    const std::span<const float> centroid{centroids.data() + static_cast<std::size_t>(c) * dim,
                                          dim};
    const auto res = greedy_build_search(graph, data, medoid, centroid, search_width);
    add(res.candidates.front().second);
  }
  add(medoid);
  return out;
}

VertexId select_entry(const EntryCandidates& candidates, std::span<const float> query,
                      std::uint64_t* distance_evals) {
  if (candidates.size() == 0) throw std::invalid_argument("select_entry: no candidates");
  float best_d = exact_distance(query, candidates.vec(0));
  VertexId best = candidates.ids[0];
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const float d = exact_distance(query, candidates.vec(i));
    if (d < best_d || (d == best_d && candidates.ids[i] < best)) {
      best_d = d;
      best = candidates.ids[i];
    }
  }
  if (distance_evals) *distance_evals += candidates.size();
  return best;
}

void EntryCandidates::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_u32(out, kEntriesMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(ids.size()));
  write_u32(out, dim);
  write_u32(out, n_cluster);
  write_u32(out, medoid);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    write_u32(out, ids[i]);
    out.write(reinterpret_cast<const char*>(vectors.data() + i * dim),
              static_cast<std::streamsize>(dim * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

EntryCandidates EntryCandidates::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  if (read_u32(in) != kEntriesMagic) throw std::runtime_error("bad entries magic: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported entries version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32(in);
  EntryCandidates out;
  out.dim = read_u32(in);
  out.n_cluster = read_u32(in);
  out.medoid = read_u32(in);
  out.ids.resize(count);
  out.vectors.resize(static_cast<std::size_t>(count) * out.dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    out.ids[i] = read_u32(in);
    in.read(reinterpret_cast<char*>(out.vectors.data() + static_cast<std::size_t>(i) * out.dim),
            static_cast<std::streamsize>(out.dim * sizeof(float)));
  }
  if (!in) throw std::runtime_error("truncated entries file: " + path);
  return out;
}

}  // namespace packann
