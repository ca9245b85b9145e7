#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "cbaa/sketch.hpp"

namespace cbaa {

/// One observed contact. Direction is already normalized: iip is the
/// monitored-side address.
struct IpPair {
  std::uint32_t iip = 0;
  std::uint32_t oip = 0;
  friend bool operator==(const IpPair&, const IpPair&) = default;
};

/// Sets one bit per array in the sketch selected by the mangled inner IP.
/// Never reads cube state, so concurrent calls are safe.
void record_pair(CubeOfBitsArrays& cube, IpPair pair);

struct StreamOptions {
  unsigned workers = 1;
  std::size_t batchSize = std::size_t{64} * 1024;
};

/// Records every pair. Input order and the worker settings do not affect the
/// result. Returns the number of pairs processed.
std::size_t record_stream(CubeOfBitsArrays& cube, std::span<const IpPair> pairs, StreamOptions options = {});

}  // namespace cbaa
