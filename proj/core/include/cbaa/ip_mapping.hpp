#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbaa/config.hpp"

namespace cbaa {

/// Fixed 32-bit avalanche mix shared by every implementation of the format.
constexpr std::uint32_t mix32(std::uint32_t x) {
  std::uint32_t h = x;
  h ^= h >> 16;
  h *= 0x45D9F3Bu;
  h ^= h >> 16;
  h *= 0x45D9F3Bu;
  h ^= h >> 16;
  return h;
}

/// Multiplicative inverse of an odd number modulo 2^32 (Newton iteration).
constexpr std::uint32_t inverse_mod_2_32(std::uint32_t a) {
  std::uint32_t x = a;  // correct to 3 bits for odd a
  for (int i = 0; i < 5; ++i) x *= 2u - a * x;
  return x;
}

struct MangledIp {
  std::uint32_t value = 0;
  friend bool operator==(MangledIp, MangledIp) = default;
};

struct IpParts {
  std::uint32_t rp = 0;  // selects the cardinality sketch
  std::uint32_t lp = 0;  // remaining 32-r bits
};

using ColumnTuple = std::vector<std::uint32_t>;

/// Affine bijection x -> a*x + b (mod 2^32).
inline MangledIp mangle(std::uint32_t ip, const SketchConfig& c) { return {c.mangleA * ip + c.mangleB}; }

inline std::uint32_t unmangle(MangledIp m, const SketchConfig& c) {
  return inverse_mod_2_32(c.mangleA) * (m.value - c.mangleB);
}

inline IpParts split_ip(MangledIp m, const SketchConfig& c) {
  if (c.r == 0) return {0, m.value};
  return {m.value & ((std::uint32_t{1} << c.r) - 1), m.value >> c.r};
}

inline std::uint32_t join_ip(IpParts p, const SketchConfig& c) {
  return c.r == 0 ? p.lp : (p.lp << c.r) | p.rp;
}

/// LP offsets count from the most significant LP bit (offset 0) and wrap
/// modulo the LP width. The bit at offset clbs(i) becomes the MSB of the
/// column index.
std::uint32_t ra_column_index(std::uint32_t lp, unsigned i, const SketchConfig& c);

inline std::uint32_t va_column_index(std::uint32_t lp, unsigned j, const SketchConfig& c) {
  const unsigned width = c.cbn[c.numRa + j];
  const std::uint32_t mask = width >= 32 ? ~0u : (std::uint32_t{1} << width) - 1;
  return mix32(lp ^ c.vaSeeds[j]) & mask;
}

inline std::uint32_t row_index(std::uint32_t oip, const SketchConfig& c) {
  return mix32(oip ^ c.bvSeed) & (c.g - 1);
}

/// Column indices of every restoring array for one LP.
ColumnTuple tuple_of(std::uint32_t lp, const SketchConfig& c);

/// Inverse of tuple_of when the checking parts agree; nullopt otherwise.
std::optional<std::uint32_t> lp_from_tuple(std::span<const std::uint32_t> cols, const SketchConfig& c);

}  // namespace cbaa
