#include "packann/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "packann/serialize.hpp"

namespace packann {

VectorDataset::VectorDataset(std::size_t dim, std::vector<float> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim == 0 || data_.size() % dim != 0) {
    throw std::invalid_argument("VectorDataset: data size not a multiple of dim");
  }
  count_ = data_.size() / dim;
}

void VectorDataset::check_valid() const {
  if (count_ < 1) throw std::invalid_argument("VectorDataset: empty");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw std::invalid_argument("VectorDataset: non-finite component at flat index " +
                                  std::to_string(i));
    }
  }
}

void GraphIndex::check_valid() const {
  const std::size_t n = out_neighbors.size();
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nbrs = out_neighbors[v];
    if (nbrs.size() > max_degree) {
      throw std::runtime_error("GraphIndex: vertex " + std::to_string(v) +
                               " exceeds max degree");
    }
    std::unordered_set<VertexId> seen;
    for (VertexId u : nbrs) {
      if (u == v) throw std::runtime_error("GraphIndex: self-loop at " + std::to_string(v));
      if (u >= n) throw std::runtime_error("GraphIndex: out-of-range neighbor at " +
                                           std::to_string(v));
      if (!seen.insert(u).second) {
        throw std::runtime_error("GraphIndex: duplicate neighbor at " + std::to_string(v));
      }
    }
  }
}

namespace {
constexpr std::uint32_t kGraphMagic = 0x52474B50;  // "PKGR"
constexpr std::uint32_t kMappingMagic = 0x504D4B50;  // "PKMP"
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void GraphIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_u32(out, kGraphMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(out_neighbors.size()));
  write_u32(out, max_degree);
  std::vector<VertexId> row(max_degree);
  for (const auto& nbrs : out_neighbors) {
    write_u32(out, static_cast<std::uint32_t>(nbrs.size()));
    std::fill(row.begin(), row.end(), 0);
    std::copy(nbrs.begin(), nbrs.end(), row.begin());
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(VertexId)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

GraphIndex GraphIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  if (read_u32(in) != kGraphMagic) throw std::runtime_error("bad graph magic: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported graph format version " + std::to_string(version));
  }
  const std::uint32_t n = read_u32(in);
  GraphIndex g;
  g.max_degree = read_u32(in);
  g.out_neighbors.resize(n);
  std::vector<VertexId> row(g.max_degree);
  for (std::uint32_t v = 0; v < n; ++v) {
    const std::uint32_t valid = read_u32(in);
    if (valid > g.max_degree) throw std::runtime_error("corrupt graph file: " + path);
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(VertexId)));
    if (!in) throw std::runtime_error("truncated graph file: " + path);
    g.out_neighbors[v].assign(row.begin(), row.begin() + valid);
  }
  return g;
}

void IdMapping::save_forward(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_u32(out, kMappingMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(forward.size()));
  out.write(reinterpret_cast<const char*>(forward.data()),
            static_cast<std::streamsize>(forward.size() * sizeof(VertexId)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<VertexId> IdMapping::load_forward(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  if (read_u32(in) != kMappingMagic) throw std::runtime_error("bad mapping magic: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported mapping format version " + std::to_string(version));
  }
  const std::uint32_t n = read_u32(in);
  std::vector<VertexId> fwd(n);
  in.read(reinterpret_cast<char*>(fwd.data()),
          static_cast<std::streamsize>(fwd.size() * sizeof(VertexId)));
  if (!in) throw std::runtime_error("truncated mapping file: " + path);
  return fwd;
}

void SearchParams::check_valid() const {
  if (beam < 1) throw std::invalid_argument("SearchParams: beam must be >= 1");
  if (k < 1) throw std::invalid_argument("SearchParams: k must be >= 1");
  if (search_width < k) throw std::invalid_argument("SearchParams: search width < k");
}

std::size_t Layout::total_valid() const {
  std::size_t total = 0;
  for (const auto& p : pages) total += p.valid_count;
  return total;
}

Layout dense_layout(std::size_t n, std::uint32_t b) {
  if (b == 0) throw std::invalid_argument("dense_layout: b must be >= 1");
  Layout layout;
  layout.page_capacity = b;
  const std::size_t n_pages = (n + b - 1) / b;
  layout.pages.resize(n_pages);
  for (std::size_t p = 0; p < n_pages; ++p) {
    auto& page = layout.pages[p];
    page.slots.assign(b, kPadId);
    page.valid_count = static_cast<std::uint32_t>(std::min<std::size_t>(b, n - p * b));
    for (std::uint32_t s = 0; s < page.valid_count; ++s) {
      page.slots[s] = static_cast<VertexId>(p * b + s);
    }
  }
  return layout;
}

std::vector<std::string> validate_layout(const Layout& layout, std::size_t n) {
  std::vector<std::string> violations;
  const std::uint32_t b = layout.page_capacity;
  if (b == 0) {
    violations.push_back("capacity: page_capacity is zero");
    return violations;
  }
  std::vector<std::uint32_t> times_seen(n, 0);
  for (std::size_t p = 0; p < layout.pages.size(); ++p) {
    const auto& page = layout.pages[p];
    const std::string where = " in page " + std::to_string(p);
    if (page.slots.size() != b) {
      violations.push_back("slot-count: expected " + std::to_string(b) + " slots, got " +
                           std::to_string(page.slots.size()) + where);
      continue;
    }
    if (page.valid_count < 1 || page.valid_count > b) {
      violations.push_back("valid-count-range: " + std::to_string(page.valid_count) + where);
    }
    std::unordered_set<VertexId> within;
    for (std::size_t s = 0; s < page.slots.size(); ++s) {
      const VertexId id = page.slots[s];
      const bool should_be_valid = s < page.valid_count;
      if (should_be_valid) {
        if (id == kPadId) {
          violations.push_back("pad-order: PAD inside the valid prefix at slot " +
                               std::to_string(s) + where);
          continue;
        }
        if (!within.insert(id).second) {
          violations.push_back("duplicate-in-page: id " + std::to_string(id) + where);
        }
        if (id >= n) {
          violations.push_back("out-of-range: id " + std::to_string(id) + where);
        } else {
          ++times_seen[id];
          if (page_of(id, b) != p || id % b != s) {
            violations.push_back("address: id " + std::to_string(id) + " at slot " +
                                 std::to_string(s) + where + ", expected page " +
                                 std::to_string(page_of(id, b)) + " slot " +
                                 std::to_string(id % b));
          }
        }
      } else if (id != kPadId) {
        violations.push_back("pad-order: valid id " + std::to_string(id) +
                             " after the valid prefix at slot " + std::to_string(s) + where);
      }
    }
  }
  for (std::size_t id = 0; id < n; ++id) {
    if (times_seen[id] == 0) {
      violations.push_back("missing-id: id " + std::to_string(id) + " absent");
    } else if (times_seen[id] > 1) {
      violations.push_back("duplicate-id: id " + std::to_string(id) + " appears " +
                           std::to_string(times_seen[id]) + " times");
    }
  }
  return violations;
}

}  // namespace packann
