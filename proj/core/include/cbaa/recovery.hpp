#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cbaa/estimator.hpp"
#include "cbaa/ip_mapping.hpp"
#include "cbaa/sketch.hpp"

namespace cbaa {

/// Hot column indices of each restoring array, ascending.
struct HotColumnSet {
  std::vector<std::vector<std::uint32_t>> perArray;

  /// Size of the tuple space, saturating at UINT64_MAX.
  std::uint64_t tuple_count() const;
};

struct SuperHostRecord {
  std::uint32_t ip = 0;  // original, unmangled inner IP
  double estimate = 0.0;
  std::uint32_t csIdx = 0;
  friend bool operator==(const SuperHostRecord&, const SuperHostRecord&) = default;
};

/// A sketch whose tuple space exceeded the cap and was skipped.
struct CsOverflow {
  std::uint32_t csIdx = 0;
  std::uint64_t tupleCount = 0;
};

struct RecoveryOptions {
  double theta = 1024.0;
  ThresholdFormula formula = ThresholdFormula::Paper;
  std::uint64_t tupleCap = std::uint64_t{1} << 24;
  unsigned workers = 1;
};

struct RecoveryResult {
  std::vector<SuperHostRecord> hosts;  // descending estimate, ties by ascending ip
  std::vector<CsOverflow> overflows;
};

/// Fixed set of union-column buffers shared by tuple-checking workers. A
/// buffer is held by exactly one worker between acquire and release.
class ScratchPool {
 public:
  ScratchPool(std::size_t buffers, std::uint32_t g);

  class Lease {
   public:
    Lease(ScratchPool& pool, std::size_t slot) : pool_(&pool), slot_(slot) {}
    Lease(Lease&& o) noexcept : pool_(std::exchange(o.pool_, nullptr)), slot_(o.slot_) {}
    Lease& operator=(Lease&&) = delete;
    ~Lease() {
      if (pool_) pool_->release(slot_);
    }
    std::span<std::uint64_t> buffer() { return pool_->buffers_[slot_]; }

   private:
    ScratchPool* pool_;
    std::size_t slot_;
  };

  /// Blocks until a buffer is free.
  Lease acquire();
  std::size_t size() const { return buffers_.size(); }

 private:
  void release(std::size_t slot);

  std::vector<std::vector<std::uint64_t>> buffers_;
  std::vector<std::size_t> free_;
  std::mutex mu_;
  std::condition_variable cv_;
};

/// Columns of each restoring array whose zero count is at most thetaBn.
HotColumnSet find_hot_columns(const CubeOfBitsArrays& cube, std::uint32_t csIdx, double thetaBn);

/// Reconstructs the LP behind a tuple and tests its union column (restoring
/// and validating arrays) against thetaBn. `scratch` must hold column_words(g) words.
std::optional<SuperHostRecord> check_tuple(const CubeOfBitsArrays& cube, std::uint32_t csIdx,
                                           std::span<const std::uint32_t> tuple, double thetaBn, double epsilon,
                                           std::span<std::uint64_t> scratch);

/// Convenience overload that allocates its own scratch buffer.
std::optional<SuperHostRecord> check_tuple(const CubeOfBitsArrays& cube, std::uint32_t csIdx,
                                           std::span<const std::uint32_t> tuple, double thetaBn, double epsilon);

/// All super hosts of one sketch. If the tuple space exceeds the cap the
/// sketch is skipped and an overflow is reported.
RecoveryResult recover_cs(const CubeOfBitsArrays& cube, std::uint32_t csIdx, const RecoveryOptions& options);

/// Recovery over every sketch. Output is independent of the worker count.
RecoveryResult recover_all(const CubeOfBitsArrays& cube, const RecoveryOptions& options);

/// Canonical ordering: descending estimate, ascending ip on ties.
void sort_records(std::vector<SuperHostRecord>& records);

}  // namespace cbaa
