#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "packann/core.hpp"

namespace packann {

/// On-disk geometry. `b` is always derived from the page size: a block is
/// dim*4 vector bytes + 4 valid-count bytes + R*4 neighbor bytes, and a page
/// holds as many whole blocks as fit.
struct IndexFileParams {
  std::uint32_t count = 0;  // N
  std::uint32_t dim = 0;
  std::uint32_t max_degree = 0;  // R
  std::uint32_t blocks_per_page = 0;  // b
  std::uint32_t page_size = 4096;

  std::uint32_t page_count() const {
    return (count + blocks_per_page - 1) / blocks_per_page;
  }
};

std::uint32_t block_width_bytes(std::uint32_t dim, std::uint32_t max_degree);

/// floor(page_size / block width); throws std::invalid_argument when not even
/// one block fits.
std::uint32_t blocks_per_page(std::uint32_t dim, std::uint32_t max_degree,
                              std::uint32_t page_size);

/// Writes the page-aligned index file: one page_size header region, then one
/// page_size region per page, blocks at fixed offsets within their page.
/// Blocks must arrive in dense final-id order (blocks[j].id == j).
/// Writing identical input twice produces identical bytes.
void write_index(std::span<const DataBlock> blocks, const IndexFileParams& params,
                 const std::filesystem::path& path);

struct PageData {
  std::uint32_t page_index = 0;
  std::vector<DataBlock> blocks;  // valid blocks only, slot order
};

struct ReadResult {
  std::vector<PageData> pages;  // ascending page index, duplicates coalesced
  std::uint32_t distinct_pages = 0;

  const PageData* find(std::uint32_t page_index) const;
};

/// Completion handle for one read batch. done() may be polled; wait() blocks
/// (or, on the simulator, advances the session clock) and returns the data.
class ReadHandle {
 public:
  virtual ~ReadHandle() = default;
  virtual bool done() = 0;
  virtual const ReadResult& wait() = 0;
};

/// Per-query I/O session. Sessions from one backend are independent: waiting
/// in one never stalls another. Counted reads are the distinct pages of each
/// issued batch, identical across backends.
class IoSession {
 public:
  virtual ~IoSession() = default;

  /// Issues one batch. Duplicate page indices are coalesced; out-of-range
  /// indices throw std::out_of_range. An empty batch completes immediately.
  virtual std::unique_ptr<ReadHandle> read_pages(std::span<const std::uint32_t> pages) = 0;

  /// Advances this query's logical compute clock (simulator time model);
  /// a no-op on the file backend.
  virtual void tick([[maybe_unused]] std::uint64_t units) {}

  virtual std::uint64_t pages_read() const = 0;

  /// Simulator: logical clock at the current moment. File backend: 0.
  virtual std::uint64_t cost_units() const = 0;
};

class StorageBackend {
 public:
  virtual ~StorageBackend() = default;
  virtual const IndexFileParams& params() const = 0;
  virtual std::unique_ptr<IoSession> open_session() const = 0;
};

/// Real file backend; batches run on a background thread so callers can
/// overlap compute with the read.
class FileBackend : public StorageBackend {
 public:
  explicit FileBackend(const std::filesystem::path& path);
  ~FileBackend() override;

  const IndexFileParams& params() const override { return params_; }
  std::unique_ptr<IoSession> open_session() const override;

 private:
  IndexFileParams params_;
  int fd_ = -1;
};

/// Deterministic in-memory simulator. A batch completes once the session
/// clock has advanced past per_batch + per_page * distinct cost units;
/// wait() jumps the clock to the completion time.
struct SimCosts {
  std::uint64_t per_batch = 64;
  std::uint64_t per_page = 16;
};

class SimBackend : public StorageBackend {
 public:
  SimBackend(std::vector<std::vector<DataBlock>> pages, const IndexFileParams& params,
             const SimCosts& costs);
  /// Loads every page of an index file into memory once.
  SimBackend(const std::filesystem::path& path, const SimCosts& costs);

  const IndexFileParams& params() const override { return params_; }
  std::unique_ptr<IoSession> open_session() const override;

  const std::vector<DataBlock>& page(std::uint32_t index) const { return pages_[index]; }

 private:
  IndexFileParams params_;
  SimCosts costs_;
  std::vector<std::vector<DataBlock>> pages_;
};

/// Reads the header of an index file (validating magic and version).
IndexFileParams read_index_header(const std::filesystem::path& path);

/// Convenience: every block of the index in id order, via one session.
std::vector<DataBlock> read_all_blocks(const StorageBackend& backend);

/// Splits blocks in id order into per-page vectors (the SimBackend input).
std::vector<std::vector<DataBlock>> paginate_blocks(std::span<const DataBlock> blocks,
                                                    std::uint32_t blocks_per_page);

}  // namespace packann
