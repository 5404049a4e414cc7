#include "packann/storage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <future>
#include <stdexcept>

#include "packann/serialize.hpp"

namespace packann {

namespace {

constexpr std::uint32_t kIndexMagic = 0x58494B50;  // "PKIX"
constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::uint32_t> coalesce(std::span<const std::uint32_t> pages,
                                    std::uint32_t page_count) {
  std::vector<std::uint32_t> distinct(pages.begin(), pages.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (std::uint32_t p : distinct) {
    if (p >= page_count) {
      throw std::out_of_range("read_pages: page " + std::to_string(p) + " out of range (" +
                              std::to_string(page_count) + " pages)");
    }
  }
  return distinct;
}

void encode_block(char* dst, const DataBlock& block, const IndexFileParams& p) {
  std::memcpy(dst, block.vector.data(), p.dim * sizeof(float));
  dst += p.dim * sizeof(float);
  const std::uint32_t valid = static_cast<std::uint32_t>(block.neighbors.size());
  std::memcpy(dst, &valid, sizeof(valid));
  dst += sizeof(valid);
  std::memcpy(dst, block.neighbors.data(), valid * sizeof(VertexId));
  // the remaining neighbor slots stay zeroed
}

DataBlock decode_block(const char* src, VertexId id, const IndexFileParams& p) {
  DataBlock block;
  block.id = id;
  block.vector.resize(p.dim);
  std::memcpy(block.vector.data(), src, p.dim * sizeof(float));
  src += p.dim * sizeof(float);
  std::uint32_t valid = 0;
  std::memcpy(&valid, src, sizeof(valid));
  src += sizeof(valid);
  if (valid > p.max_degree) {
    throw std::runtime_error("corrupt block: neighbor count " + std::to_string(valid) +
                             " exceeds R=" + std::to_string(p.max_degree));
  }
  block.neighbors.resize(valid);
  std::memcpy(block.neighbors.data(), src, valid * sizeof(VertexId));
  return block;
}

std::vector<DataBlock> decode_page(const char* page_bytes, std::uint32_t page_index,
                                   const IndexFileParams& p) {
  const std::uint32_t width = block_width_bytes(p.dim, p.max_degree);
  const std::uint32_t first = page_index * p.blocks_per_page;
  const std::uint32_t valid_blocks = static_cast<std::uint32_t>(
      std::min<std::uint64_t>(p.blocks_per_page, static_cast<std::uint64_t>(p.count) - first));
  std::vector<DataBlock> blocks;
  blocks.reserve(valid_blocks);
  for (std::uint32_t s = 0; s < valid_blocks; ++s) {
    blocks.push_back(decode_block(page_bytes + static_cast<std::size_t>(s) * width,
                                  first + s, p));
  }
  return blocks;
}

void write_header(char* dst, const IndexFileParams& p) {
  std::uint32_t fields[7] = {kIndexMagic, kFormatVersion, p.count,          p.dim,
                             p.max_degree, p.blocks_per_page, p.page_size};
  std::memcpy(dst, fields, sizeof(fields));
}

IndexFileParams parse_header(const char* src) {
  std::uint32_t fields[7];
  std::memcpy(fields, src, sizeof(fields));
  if (fields[0] != kIndexMagic) throw std::runtime_error("bad index magic");
  if (fields[1] != kFormatVersion) {
    throw std::runtime_error("unsupported index format version " + std::to_string(fields[1]));
  }
  IndexFileParams p;
  p.count = fields[2];
  p.dim = fields[3];
  p.max_degree = fields[4];
  p.blocks_per_page = fields[5];
  p.page_size = fields[6];
  if (p.blocks_per_page == 0 || p.page_size == 0 ||
      p.blocks_per_page != blocks_per_page(p.dim, p.max_degree, p.page_size)) {
    throw std::runtime_error("corrupt index header");
  }
  return p;
}

}  // namespace

std::uint32_t block_width_bytes(std::uint32_t dim, std::uint32_t max_degree) {
  return dim * 4 + 4 + max_degree * 4;
}

std::uint32_t blocks_per_page(std::uint32_t dim, std::uint32_t max_degree,
                              std::uint32_t page_size) {
  const std::uint32_t width = block_width_bytes(dim, max_degree);
  const std::uint32_t b = page_size / width;
  if (b == 0) {
    throw std::invalid_argument("page size " + std::to_string(page_size) +
                                " cannot hold one block of " + std::to_string(width) +
                                " bytes");
  }
  return b;
}

void write_index(std::span<const DataBlock> blocks, const IndexFileParams& params,
                 const std::filesystem::path& path) {
  if (blocks.size() != params.count) {
    throw std::invalid_argument("write_index: block count mismatch");
  }
  if (params.blocks_per_page != blocks_per_page(params.dim, params.max_degree,
                                                params.page_size)) {
    throw std::invalid_argument("write_index: blocks_per_page inconsistent with page size");
  }
  const std::uint32_t width = block_width_bytes(params.dim, params.max_degree);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());

  std::vector<char> buf(params.page_size, 0);
  write_header(buf.data(), params);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  const std::uint32_t n_pages = params.page_count();
  for (std::uint32_t p = 0; p < n_pages; ++p) {
    std::fill(buf.begin(), buf.end(), 0);
    const std::uint32_t first = p * params.blocks_per_page;
    const std::uint32_t in_page = static_cast<std::uint32_t>(std::min<std::uint64_t>(
        params.blocks_per_page, static_cast<std::uint64_t>(params.count) - first));
    for (std::uint32_t s = 0; s < in_page; ++s) {
      const DataBlock& block = blocks[first + s];
      if (block.id != first + s) {
        throw std::invalid_argument("write_index: blocks not in dense id order");
      }
      if (block.vector.size() != params.dim || block.neighbors.size() > params.max_degree) {
        throw std::invalid_argument("write_index: block " + std::to_string(block.id) +
                                    " does not fit the declared geometry");
      }
      encode_block(buf.data() + static_cast<std::size_t>(s) * width, block, params);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

IndexFileParams read_index_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  char buf[28];
  in.read(buf, sizeof(buf));
  if (!in) throw std::runtime_error("truncated index header: " + path.string());
  return parse_header(buf);
}

const PageData* ReadResult::find(std::uint32_t page_index) const {
  for (const auto& p : pages) {
    if (p.page_index == page_index) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// File backend

namespace {

class ImmediateHandle final : public ReadHandle {
 public:
  explicit ImmediateHandle(ReadResult result) : result_(std::move(result)) {}
  bool done() override { return true; }
  const ReadResult& wait() override { return result_; }

 private:
  ReadResult result_;
};

class FileReadHandle final : public ReadHandle {
 public:
  explicit FileReadHandle(std::future<ReadResult> future) : future_(std::move(future)) {}

  bool done() override {
    if (ready_) return true;
    return future_.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
  }

  const ReadResult& wait() override {
    if (!ready_) {
      result_ = future_.get();
      ready_ = true;
    }
    return result_;
  }

 private:
  std::future<ReadResult> future_;
  ReadResult result_;
  bool ready_ = false;
};

class FileIoSession final : public IoSession {
 public:
  FileIoSession(int fd, const IndexFileParams& params) : fd_(fd), params_(params) {}

  std::unique_ptr<ReadHandle> read_pages(std::span<const std::uint32_t> pages) override {
    auto distinct = coalesce(pages, params_.page_count());
    pages_read_ += distinct.size();
    if (distinct.empty()) return std::make_unique<ImmediateHandle>(ReadResult{});
    const int fd = fd_;
    const IndexFileParams params = params_;
    auto task = [fd, params, distinct = std::move(distinct)]() {
      ReadResult result;
      result.distinct_pages = static_cast<std::uint32_t>(distinct.size());
      std::vector<char> buf(params.page_size);
      for (std::uint32_t p : distinct) {
        const off_t offset = static_cast<off_t>(p + 1) * params.page_size;
        ssize_t got = ::pread(fd, buf.data(), params.page_size, offset);
        if (got != static_cast<ssize_t>(params.page_size)) {
          throw std::runtime_error("pread failed for page " + std::to_string(p));
        }
        result.pages.push_back({p, decode_page(buf.data(), p, params)});
      }
      return result;
    };
    return std::make_unique<FileReadHandle>(std::async(std::launch::async, std::move(task)));
  }

  std::uint64_t pages_read() const override { return pages_read_; }
  std::uint64_t cost_units() const override { return 0; }

 private:
  int fd_;
  IndexFileParams params_;
  std::uint64_t pages_read_ = 0;
};

}  // namespace

FileBackend::FileBackend(const std::filesystem::path& path) {
  params_ = read_index_header(path);
  fd_ = ::open(path.c_str(), O_RDONLY);
  if (fd_ < 0) throw std::runtime_error("cannot open index file: " + path.string());
}

FileBackend::~FileBackend() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<IoSession> FileBackend::open_session() const {
  return std::make_unique<FileIoSession>(fd_, params_);
}

// ---------------------------------------------------------------------------
// Simulator backend

namespace {

class SimIoSession;

class SimReadHandle final : public ReadHandle {
 public:
  SimReadHandle(SimIoSession* session, std::uint64_t ready_at, ReadResult result)
      : session_(session), ready_at_(ready_at), result_(std::move(result)) {}

  bool done() override;
  const ReadResult& wait() override;

 private:
  SimIoSession* session_;
  std::uint64_t ready_at_;
  ReadResult result_;
};

class SimIoSession final : public IoSession {
 public:
  SimIoSession(const SimBackend* backend, const SimCosts& costs)
      : backend_(backend), costs_(costs) {}

  std::unique_ptr<ReadHandle> read_pages(std::span<const std::uint32_t> pages) override {
    auto distinct = coalesce(pages, backend_->params().page_count());
    pages_read_ += distinct.size();
    ReadResult result;
    result.distinct_pages = static_cast<std::uint32_t>(distinct.size());
    std::uint64_t ready_at = clock_;
    if (!distinct.empty()) {
      ready_at += costs_.per_batch + costs_.per_page * distinct.size();
      for (std::uint32_t p : distinct) result.pages.push_back({p, backend_->page(p)});
    }
    return std::make_unique<SimReadHandle>(this, ready_at, std::move(result));
  }

  void tick(std::uint64_t units) override { clock_ += units; }
  std::uint64_t pages_read() const override { return pages_read_; }
  std::uint64_t cost_units() const override { return clock_; }

  std::uint64_t clock() const { return clock_; }
  void advance_to(std::uint64_t t) { clock_ = std::max(clock_, t); }

 private:
  const SimBackend* backend_;
  SimCosts costs_;
  std::uint64_t clock_ = 0;
  std::uint64_t pages_read_ = 0;
};

bool SimReadHandle::done() { return session_->clock() >= ready_at_; }

const ReadResult& SimReadHandle::wait() {
  session_->advance_to(ready_at_);
  return result_;
}

}  // namespace

SimBackend::SimBackend(std::vector<std::vector<DataBlock>> pages,
                       const IndexFileParams& params, const SimCosts& costs)
    : params_(params), costs_(costs), pages_(std::move(pages)) {
  if (pages_.size() != params_.page_count()) {
    throw std::invalid_argument("SimBackend: page count mismatch");
  }
}

SimBackend::SimBackend(const std::filesystem::path& path, const SimCosts& costs)
    : costs_(costs) {
  params_ = read_index_header(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<char> buf(params_.page_size);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));  // header region
  pages_.resize(params_.page_count());
  for (std::uint32_t p = 0; p < params_.page_count(); ++p) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("truncated index file: " + path.string());
    pages_[p] = decode_page(buf.data(), p, params_);
  }
}

std::unique_ptr<IoSession> SimBackend::open_session() const {
  return std::make_unique<SimIoSession>(this, costs_);
}

std::vector<DataBlock> read_all_blocks(const StorageBackend& backend) {
  const auto& params = backend.params();
  std::vector<std::uint32_t> all(params.page_count());
  for (std::uint32_t p = 0; p < all.size(); ++p) all[p] = p;
  auto session = backend.open_session();
  auto handle = session->read_pages(all);
  const ReadResult& result = handle->wait();
  std::vector<DataBlock> blocks;
  blocks.reserve(params.count);
  for (const auto& page : result.pages) {
    for (const auto& block : page.blocks) blocks.push_back(block);
  }
  return blocks;
}

std::vector<std::vector<DataBlock>> paginate_blocks(std::span<const DataBlock> blocks,
                                                    std::uint32_t blocks_per_page) {
  std::vector<std::vector<DataBlock>> pages;
  pages.resize((blocks.size() + blocks_per_page - 1) / blocks_per_page);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    pages[i / blocks_per_page].push_back(blocks[i]);
  }
  return pages;
}

}  // namespace packann
