#include "packann/layout_mapper.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace packann {

PackResult pack(const GraphIndex& graph, const VectorDataset& data,
                const PQCodebook& codebook, const PQCodes& codes, std::uint32_t b,
                PackOrder order) {
  if (b < 1) throw std::invalid_argument("pack: b must be >= 1");
  const std::size_t n = graph.size();

  PackResult out;
  out.layout.page_capacity = b;
  out.f_inj.assign(n, kPadId);
  std::vector<std::uint8_t> visited(n, 0);

  std::vector<std::pair<float, VertexId>> ranked;
  for (std::size_t vi = 0; vi < n; ++vi) {
    const VertexId v = static_cast<VertexId>(vi);
    if (visited[v]) continue;
    visited[v] = 1;

    LogicalPage page;
    page.slots.assign(b, kPadId);
    page.slots[0] = v;
    page.valid_count = 1;

    ranked.clear();
    if (order == PackOrder::kPqDistance) {
      const AdcTable adc = adc_table(codebook, data.vec(v));
      for (VertexId u : graph.neighbors(v)) {
        ranked.emplace_back(pq_distance(adc, codes.code(u)), u);
      }
    } else {
      for (VertexId u : graph.neighbors(v)) {
        ranked.emplace_back(exact_distance(data.vec(v), data.vec(u)), u);
      }
    }
    std::sort(ranked.begin(), ranked.end());

    for (const auto& [dist, u] : ranked) {
      if (page.valid_count >= b) break;
      if (visited[u]) continue;
      visited[u] = 1;
      page.slots[page.valid_count++] = u;
    }
    out.layout.pages.push_back(std::move(page));
  }

  for (std::size_t p = 0; p < out.layout.pages.size(); ++p) {
    const auto& page = out.layout.pages[p];
    for (std::uint32_t s = 0; s < page.valid_count; ++s) {
      out.f_inj[page.slots[s]] = static_cast<VertexId>(p * b + s);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> ffd_bins(const std::vector<std::uint32_t>& sizes,
                                               std::uint32_t b) {
  if (b < 1) throw std::invalid_argument("ffd_bins: b must be >= 1");
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return sizes[a] > sizes[c];
  });
  std::vector<std::vector<std::size_t>> bins;
  std::vector<std::uint32_t> fill;
  for (std::size_t item : order) {
    const std::uint32_t sz = sizes[item];
    if (sz > b) throw std::invalid_argument("ffd_bins: item larger than bin");
    bool placed = false;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (fill[i] + sz <= b) {
        bins[i].push_back(item);
        fill[i] += sz;
        placed = true;
        break;
      }
    }
    if (!placed) {
      bins.push_back({item});
      fill.push_back(sz);
    }
  }
  return bins;
}

MergeResult merge(const Layout& temp, std::uint32_t b) {
  if (b < 1) throw std::invalid_argument("merge: b must be >= 1");
  if (temp.page_capacity != b) {
    throw std::invalid_argument("merge: temp layout capacity mismatch");
  }
  std::vector<std::uint32_t> sizes(temp.pages.size());
  for (std::size_t p = 0; p < temp.pages.size(); ++p) sizes[p] = temp.pages[p].valid_count;

  auto bins = ffd_bins(sizes, b);
  std::vector<std::uint32_t> fill(bins.size(), 0);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    for (std::size_t item : bins[i]) fill[i] += sizes[item];
  }
  // Full bins first so only the non-full tail ever crosses a page boundary.
  std::vector<std::size_t> bin_order(bins.size());
  std::iota(bin_order.begin(), bin_order.end(), 0);
  std::stable_sort(bin_order.begin(), bin_order.end(), [&](std::size_t a, std::size_t c) {
    return fill[a] > fill[c];
  });

  // Temp ids in final order: bins in order, each bin's pages in placement
  // order, each page's valid slots in slot order.
  std::vector<VertexId> temp_sequence;
  temp_sequence.reserve(temp.total_valid());
  for (std::size_t bi : bin_order) {
    for (std::size_t p : bins[bi]) {
      for (std::uint32_t s = 0; s < sizes[p]; ++s) {
        temp_sequence.push_back(static_cast<VertexId>(p * b + s));
      }
    }
  }

  MergeResult out;
  const std::size_t n_valid = temp_sequence.size();
  out.layout = dense_layout(n_valid, b);
  out.f_surj.assign(temp.pages.size() * static_cast<std::size_t>(b), kPadId);
  for (std::size_t j = 0; j < n_valid; ++j) {
    out.f_surj[temp_sequence[j]] = static_cast<VertexId>(j);
  }
  return out;
}

IdMapping compose_mapping(const std::vector<VertexId>& f_inj,
                          const std::vector<VertexId>& f_surj) {
  const std::size_t n = f_inj.size();
  IdMapping m;
  m.f_inj = f_inj;
  m.f_surj = f_surj;
  m.forward.assign(n, kPadId);
  m.inverse.assign(n, kPadId);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId t = f_inj[i];
    if (t == kPadId || t >= f_surj.size()) {
      throw std::runtime_error("compose_mapping: f_inj not total on {0..N-1}");
    }
    const VertexId f = f_surj[t];
    if (f == kPadId || f >= n) {
      throw std::runtime_error("compose_mapping: f_surj undefined on a valid temp id");
    }
    if (m.inverse[f] != kPadId) {
      throw std::runtime_error("compose_mapping: final id " + std::to_string(f) +
                               " assigned twice (not a bijection)");
    }
    m.forward[i] = f;
    m.inverse[f] = static_cast<VertexId>(i);
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (m.inverse[f] == kPadId) {
      throw std::runtime_error("compose_mapping: final id " + std::to_string(f) +
                               " never assigned (not a bijection)");
    }
  }
  return m;
}

GraphIndex remap_graph(const GraphIndex& graph, const IdMapping& mapping) {
  GraphIndex out;
  out.max_degree = graph.max_degree;
  out.out_neighbors.resize(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    const VertexId nv = mapping.forward[v];
    auto& nbrs = out.out_neighbors[nv];
    nbrs.reserve(graph.out_neighbors[v].size());
    for (VertexId u : graph.out_neighbors[v]) nbrs.push_back(mapping.forward[u]);
  }
  return out;
}

std::vector<DataBlock> remap_blocks(const GraphIndex& graph, const VectorDataset& data,
                                    const IdMapping& mapping, const Layout& final_layout) {
  const std::size_t n = graph.size();
  if (final_layout.total_valid() != n) {
    throw std::invalid_argument("remap_blocks: layout does not cover the graph");
  }
  std::vector<DataBlock> blocks(n);
  for (std::size_t j = 0; j < n; ++j) {
    const VertexId orig = mapping.inverse[j];
    DataBlock& blk = blocks[j];
    blk.id = static_cast<VertexId>(j);
    const auto v = data.vec(orig);
    blk.vector.assign(v.begin(), v.end());
    blk.neighbors.reserve(graph.out_neighbors[orig].size());
    for (VertexId u : graph.out_neighbors[orig]) blk.neighbors.push_back(mapping.forward[u]);
  }
  return blocks;
}

IdMapping identity_mapping(std::size_t n) {
  IdMapping m;
  m.f_inj.resize(n);
  m.f_surj.resize(n);
  m.forward.resize(n);
  m.inverse.resize(n);
  std::iota(m.f_inj.begin(), m.f_inj.end(), 0);
  std::iota(m.f_surj.begin(), m.f_surj.end(), 0);
  std::iota(m.forward.begin(), m.forward.end(), 0);
  std::iota(m.inverse.begin(), m.inverse.end(), 0);
  return m;
}

}  // namespace packann
