#include "cbaa/sketch.hpp"

#include <atomic>
#include <bit>
#include <cassert>

namespace cbaa {

namespace {

std::uint64_t low_mask(std::uint32_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

CubeOfBitsArrays::CubeOfBitsArrays(SketchConfig config) : config_(std::move(config)) {
  config_.validate();
  arrayBase_.resize(config_.arrayCount());
  std::uint64_t base = 0;
  for (unsigned i = 0; i < config_.arrayCount(); ++i) {
    arrayBase_[i] = base;
    base += config_.columnCount(i) * config_.g;
  }
  sketchBase_ = base;
  words_.assign((config_.totalBits() + 63) / 64, 0);
}

void CubeOfBitsArrays::check_index([[maybe_unused]] std::uint32_t csIdx, [[maybe_unused]] unsigned arrayIdx,
                                   [[maybe_unused]] std::uint32_t colIdx) const {
  assert(csIdx < config_.sketchCount());
  assert(arrayIdx < config_.arrayCount());
  assert(colIdx < config_.columnCount(arrayIdx));
}

void CubeOfBitsArrays::set_bit(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx, std::uint32_t row) {
  check_index(csIdx, arrayIdx, colIdx);
  assert(row < config_.g);
  const std::uint64_t k = column_offset(csIdx, arrayIdx, colIdx) + row;
  std::atomic_ref<std::uint64_t> word(words_[k >> 6]);
  word.fetch_or(std::uint64_t{1} << (k & 63), std::memory_order_relaxed);
}

bool CubeOfBitsArrays::test_bit(std::uint32_t csIdx, unsigned arrayIdx, std::uint32_t colIdx,
                                std::uint32_t row) const {
  check_index(csIdx, arrayIdx, colIdx);
  const std::uint64_t k = column_offset(csIdx, arrayIdx, colIdx) + row;
  return (words_[k >> 6] >> (k & 63)) & 1u;
}

std::uint32_t CubeOfBitsArrays::zero_count_column(std::uint32_t csIdx, unsigned arrayIdx,
                                                  std::uint32_t colIdx) const {
  check_index(csIdx, arrayIdx, colIdx);
  const std::uint32_t g = config_.g;
  const std::uint64_t k = column_offset(csIdx, arrayIdx, colIdx);
  if (g < 64) {
    const std::uint64_t w = (words_[k >> 6] >> (k & 63)) & low_mask(g);
    return g - static_cast<std::uint32_t>(std::popcount(w));
  }
  std::uint32_t ones = 0;
  const std::uint64_t* p = words_.data() + (k >> 6);
  for (std::uint32_t i = 0; i < g / 64; ++i) ones += static_cast<std::uint32_t>(std::popcount(p[i]));
  return g - ones;
}

std::uint64_t CubeOfBitsArrays::zero_count_array(std::uint32_t csIdx, unsigned arrayIdx) const {
  const std::uint64_t begin = column_offset(csIdx, arrayIdx, 0);
  const std::uint64_t bits = config_.columnCount(arrayIdx) * config_.g;
  std::uint64_t ones = 0;
  if (bits >= 64) {
    // Arrays hold a power-of-two number of bits, so a >=64-bit array is word aligned.
    const std::uint64_t* p = words_.data() + (begin >> 6);
    for (std::uint64_t i = 0; i < bits / 64; ++i) ones += static_cast<std::uint64_t>(std::popcount(p[i]));
  } else {
    const std::uint64_t w = (words_[begin >> 6] >> (begin & 63)) & low_mask(static_cast<std::uint32_t>(bits));
    ones = static_cast<std::uint64_t>(std::popcount(w));
  }
  return bits - ones;
}

std::uint32_t CubeOfBitsArrays::union_columns_into(std::uint32_t csIdx,
                                                   std::span<const std::uint32_t> colIdxPerArray,
                                                   std::span<std::uint64_t> scratch) const {
  assert(colIdxPerArray.size() == config_.arrayCount());
  const std::uint32_t g = config_.g;
  const std::size_t nWords = column_words(g);
  assert(scratch.size() >= nWords);
  const std::uint64_t mask = low_mask(g < 64 ? g : 64);
  for (std::size_t i = 0; i < nWords; ++i) scratch[i] = mask;

  for (unsigned a = 0; a < colIdxPerArray.size(); ++a) {
    check_index(csIdx, a, colIdxPerArray[a]);
    const std::uint64_t k = column_offset(csIdx, a, colIdxPerArray[a]);
    if (g < 64) {
      scratch[0] &= (words_[k >> 6] >> (k & 63)) & mask;
    } else {
      const std::uint64_t* p = words_.data() + (k >> 6);
      for (std::size_t i = 0; i < nWords; ++i) scratch[i] &= p[i];
    }
  }
  std::uint32_t ones = 0;
  for (std::size_t i = 0; i < nWords; ++i) ones += static_cast<std::uint32_t>(std::popcount(scratch[i]));
  return g - ones;
}

UnionColumn CubeOfBitsArrays::union_columns(std::uint32_t csIdx,
                                            std::span<const std::uint32_t> colIdxPerArray) const {
  UnionColumn out;
  out.bits.resize(column_words(config_.g));
  out.zeroCount = union_columns_into(csIdx, colIdxPerArray, out.bits);
  return out;
}

void CubeOfBitsArrays::merge_from(const CubeOfBitsArrays& other) {
  if (!(config_ == other.config_))
    throw MergeError("cannot merge cubes with different configs (field '" +
                     first_config_difference(config_, other.config_) + "' differs)");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

std::uint64_t CubeOfBitsArrays::popcount() const {
  std::uint64_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

CubeOfBitsArrays merge_cubes(const CubeOfBitsArrays& a, const CubeOfBitsArrays& b) {
  CubeOfBitsArrays out = a;
  out.merge_from(b);
  return out;
}

}  // namespace cbaa
