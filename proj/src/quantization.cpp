#include "packann/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "packann/serialize.hpp"

namespace packann {

namespace {

constexpr std::uint32_t kCodebookMagic = 0x42434B50;  // "PKCB"
constexpr std::uint32_t kCodesMagic = 0x51504B50;     // "PKPQ"
constexpr std::uint32_t kFormatVersion = 1;

float chunk_dist_sq(const float* a, const float* b, std::uint32_t n) {
  float sum = 0.0f;
  for (std::uint32_t i = 0; i < n; ++i) {
    const float d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

float exact_distance_sq(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("exact_distance: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  }
  float sum = 0.0f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float d = x[i] - y[i];
    sum += d * d;
  }
  return sum;
}

float exact_distance(std::span<const float> x, std::span<const float> y) {
  return std::sqrt(exact_distance_sq(x, y));
}

PQCodebook train_pq(const VectorDataset& data, std::uint32_t num_chunks,
                    std::uint32_t iters, std::uint64_t seed) {
  const std::uint32_t dim = static_cast<std::uint32_t>(data.dim());
  if (num_chunks == 0 || dim % num_chunks != 0) {
    throw std::invalid_argument("train_pq: dim " + std::to_string(dim) +
                                " not divisible by M " + std::to_string(num_chunks));
  }
  const std::uint32_t cd = dim / num_chunks;
  const std::size_t n = data.count();
  constexpr std::uint32_t K = PQCodebook::kPivots;

  PQCodebook cb;
  cb.num_chunks = num_chunks;
  cb.dim = dim;
  cb.centroids.assign(static_cast<std::size_t>(num_chunks) * K * cd, 0.0f);

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> sample(n);
  std::iota(sample.begin(), sample.end(), 0);
  std::shuffle(sample.begin(), sample.end(), rng);

  // Init pivots from a distinct sample, cycling when the dataset is small.
  for (std::uint32_t m = 0; m < num_chunks; ++m) {
    for (std::uint32_t c = 0; c < K; ++c) {
      const std::uint32_t src = sample[c % n];
      const float* v = data.vec(src).data() + static_cast<std::size_t>(m) * cd;
      std::copy(v, v + cd, cb.centroids.begin() +
                               (static_cast<std::size_t>(m) * K + c) * cd);
    }
  }

  std::vector<std::uint32_t> assign(n);
  std::vector<double> sums(static_cast<std::size_t>(K) * cd);
  std::vector<std::uint32_t> counts(K);

  for (std::uint32_t m = 0; m < num_chunks; ++m) {
    float* chunk_centroids = cb.centroids.data() + static_cast<std::size_t>(m) * K * cd;
    for (std::uint32_t it = 0; it < iters; ++it) {
      // Assignment, ties to the lowest pivot index.
      for (std::size_t i = 0; i < n; ++i) {
        const float* x = data.vec(static_cast<VertexId>(i)).data() + static_cast<std::size_t>(m) * cd;
        float best = chunk_dist_sq(x, chunk_centroids, cd);
        std::uint32_t best_c = 0;
        for (std::uint32_t c = 1; c < K; ++c) {
          const float d = chunk_dist_sq(x, chunk_centroids + static_cast<std::size_t>(c) * cd, cd);
          if (d < best) {
            best = d;
            best_c = c;
          }
        }
        assign[i] = best_c;
      }
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const float* x = data.vec(static_cast<VertexId>(i)).data() + static_cast<std::size_t>(m) * cd;
        double* s = sums.data() + static_cast<std::size_t>(assign[i]) * cd;
        for (std::uint32_t j = 0; j < cd; ++j) s[j] += x[j];
        ++counts[assign[i]];
      }
      for (std::uint32_t c = 0; c < K; ++c) {
        if (counts[c] == 0) continue;
        float* dst = chunk_centroids + static_cast<std::size_t>(c) * cd;
        const double* s = sums.data() + static_cast<std::size_t>(c) * cd;
        for (std::uint32_t j = 0; j < cd; ++j) {
          dst[j] = static_cast<float>(s[j] / counts[c]);
        }
      }
      // Re-seed empty clusters from the point farthest from its pivot.
      for (std::uint32_t c = 0; c < K; ++c) {
        if (counts[c] != 0) continue;
        float worst = -1.0f;
        std::size_t worst_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const float* x = data.vec(static_cast<VertexId>(i)).data() + static_cast<std::size_t>(m) * cd;
          const float d = chunk_dist_sq(
              x, chunk_centroids + static_cast<std::size_t>(assign[i]) * cd, cd);
          if (d > worst) {
            worst = d;
            worst_i = i;
          }
        }
        if (worst <= 0.0f) break;  // all points already coincide with pivots
        const float* x = data.vec(static_cast<VertexId>(worst_i)).data() + static_cast<std::size_t>(m) * cd;
        std::copy(x, x + cd, chunk_centroids + static_cast<std::size_t>(c) * cd);
        assign[worst_i] = c;
      }
    }
  }
  return cb;
}

PQCode encode(const PQCodebook& cb, std::span<const float> vec) {
  if (vec.size() != cb.dim) {
    throw std::invalid_argument("encode: dimension mismatch");
  }
  const std::uint32_t cd = cb.chunk_dim();
  PQCode out;
  out.codes.resize(cb.num_chunks);
  for (std::uint32_t m = 0; m < cb.num_chunks; ++m) {
    const float* x = vec.data() + static_cast<std::size_t>(m) * cd;
    float best = chunk_dist_sq(x, cb.centroid(m, 0), cd);
    std::uint32_t best_c = 0;
    for (std::uint32_t c = 1; c < PQCodebook::kPivots; ++c) {
      const float d = chunk_dist_sq(x, cb.centroid(m, c), cd);
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    out.codes[m] = static_cast<std::uint8_t>(best_c);
  }
  return out;
}

PQCodes encode_all(const PQCodebook& cb, const VectorDataset& data) {
  PQCodes out;
  out.num_chunks = cb.num_chunks;
  out.codes.resize(data.count() * cb.num_chunks);
  for (std::size_t i = 0; i < data.count(); ++i) {
    const PQCode c = encode(cb, data.vec(static_cast<VertexId>(i)));
    std::copy(c.codes.begin(), c.codes.end(),
              out.codes.begin() + i * cb.num_chunks);
  }
  return out;
}

AdcTable adc_table(const PQCodebook& cb, std::span<const float> query) {
  if (query.size() != cb.dim) {
    throw std::invalid_argument("adc_table: dimension mismatch");
  }
  const std::uint32_t cd = cb.chunk_dim();
  AdcTable t;
  t.num_chunks = cb.num_chunks;
  t.table.resize(static_cast<std::size_t>(cb.num_chunks) * PQCodebook::kPivots);
  for (std::uint32_t m = 0; m < cb.num_chunks; ++m) {
    const float* q = query.data() + static_cast<std::size_t>(m) * cd;
    for (std::uint32_t c = 0; c < PQCodebook::kPivots; ++c) {
      t.table[static_cast<std::size_t>(m) * PQCodebook::kPivots + c] =
          chunk_dist_sq(q, cb.centroid(m, c), cd);
    }
  }
  return t;
}

std::vector<float> reconstruct(const PQCodebook& cb, std::span<const std::uint8_t> code) {
  std::vector<float> out(cb.dim);
  const std::uint32_t cd = cb.chunk_dim();
  for (std::uint32_t m = 0; m < cb.num_chunks; ++m) {
    const float* c = cb.centroid(m, code[m]);
    std::copy(c, c + cd, out.begin() + static_cast<std::size_t>(m) * cd);
  }
  return out;
}

void PQCodebook::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_u32(out, kCodebookMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, num_chunks);
  write_u32(out, dim);
  out.write(reinterpret_cast<const char*>(centroids.data()),
            static_cast<std::streamsize>(centroids.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

PQCodebook PQCodebook::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  if (read_u32(in) != kCodebookMagic) throw std::runtime_error("bad codebook magic: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported codebook version " + std::to_string(version));
  }
  PQCodebook cb;
  cb.num_chunks = read_u32(in);
  cb.dim = read_u32(in);
  if (cb.num_chunks == 0 || cb.dim % cb.num_chunks != 0) {
    throw std::runtime_error("corrupt codebook header: " + path);
  }
  cb.centroids.resize(static_cast<std::size_t>(cb.num_chunks) * kPivots * cb.chunk_dim());
  in.read(reinterpret_cast<char*>(cb.centroids.data()),
          static_cast<std::streamsize>(cb.centroids.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated codebook: " + path);
  return cb;
}

void PQCodes::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_u32(out, kCodesMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(count()));
  write_u32(out, num_chunks);
  out.write(reinterpret_cast<const char*>(codes.data()),
            static_cast<std::streamsize>(codes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

PQCodes PQCodes::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  if (read_u32(in) != kCodesMagic) throw std::runtime_error("bad codes magic: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported codes version " + std::to_string(version));
  }
  const std::uint32_t n = read_u32(in);
  PQCodes out;
  out.num_chunks = read_u32(in);
  out.codes.resize(static_cast<std::size_t>(n) * out.num_chunks);
  in.read(reinterpret_cast<char*>(out.codes.data()),
          static_cast<std::streamsize>(out.codes.size()));
  if (!in) throw std::runtime_error("truncated codes: " + path);
  return out;
}

}  // namespace packann
