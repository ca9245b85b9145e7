#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cbaa/config.hpp"

namespace cbaa {

/// g-bit AND of several columns together with its zero count.
struct UnionColumn {
  std::vector<std::uint64_t> bits;  // ceil(g/64) words, unused high bits are 0
  std::uint32_t zeroCount = 0;
};

/// Thrown when two cubes built from different configs are combined.
class MergeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The full sketch: 2^r cardinality sketches, each holding numRa + numVa bit
/// arrays of 2^cbn(i) columns by g rows.
///
/// Bits are addressed by a global index: sketches in ascending order, then
/// arrays (restoring first, then validating), then columns, then rows. Global
/// bit k lives in word k/64 at position k%64, which makes the little-endian
/// byte image of the word vector the external format. g is a power of two,
/// so a column never straddles a word boundary.
///
/// set_bit may be called concurrently from any number of threads. Every read
/// requires that no writer is active.
class CubeOfBitsArrays {
 public:
  /// Validates the config and allocates an all-zero cube.
  explicit CubeOfBitsArrays(SketchConfig config);

  const SketchConfig& config() const { return config_; }

  std::uint64_t bit_count() const { return config_.totalBits(); }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> mutable_words() { return words_; }

  /// Index of the first bit of a column.
  std::uint64_t column_offset(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx) const {
    return sketchBase_ * csIdx + arrayBase_[arrayIdx] + std::uint64_t{colIdx} * config_.g;
  }

  /// Atomic word-granularity OR; safe against concurrent set_bit calls.
  void set_bit(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx, std::uint32_t row);

  bool test_bit(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx, std::uint32_t row) const;

  std::uint32_t zero_count_column(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx) const;

  /// Zero bits across every column of one array in one sketch.
  std::uint64_t zero_count_array(std::uint32_t csIdx, unsigned arrayIdx) const;

  /// AND of one column per array; colIdxPerArray.size() must equal arrayCount().
  UnionColumn union_columns(std::uint32_t csIdx, std::span<const std::uint32_t> colIdxPerArray) const;

  /// Same as union_columns but writes into caller-owned scratch storage.
  std::uint32_t union_columns_into(std::uint32_t csIdx, std::span<const std::uint32_t> colIdxPerArray,
                                   std::span<std::uint64_t> scratch) const;

  /// In-place OR with another cube of identical config.
  void merge_from(const CubeOfBitsArrays& other);

  std::uint64_t popcount() const;

  friend bool operator==(const CubeOfBitsArrays& a, const CubeOfBitsArrays& b) {
    return a.config_ == b.config_ && a.words_ == b.words_;
  }

 private:
  void check_index(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx) const;

  SketchConfig config_;
  std::uint64_t sketchBase_ = 0;
  std::vector<std::uint64_t> arrayBase_;
  std::vector<std::uint64_t> words_;
};

/// Bitwise OR of two cubes. Throws MergeError naming the differing config field.
CubeOfBitsArrays merge_cubes(const CubeOfBitsArrays& a, const CubeOfBitsArrays& b);

/// Number of 64-bit words a union column of g rows occupies.
inline std::size_t column_words(std::uint32_t g) { return (g + 63) / 64; }

}  // namespace cbaa
