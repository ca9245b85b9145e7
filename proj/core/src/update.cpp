#include "cbaa/update.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "cbaa/ip_mapping.hpp"

namespace cbaa {

void record_pair(CubeOfBitsArrays& cube, IpPair pair) {
  const SketchConfig& c = cube.config();
  const std::uint32_t row = row_index(mangle(pair.oip, c).value, c);
  const IpParts parts = split_ip(mangle(pair.iip, c), c);
  for (unsigned i = 0; i < c.numRa; ++i) cube.set_bit(parts.rp, i, ra_column_index(parts.lp, i, c), row);
  for (unsigned j = 0; j < c.numVa; ++j)
    cube.set_bit(parts.rp, c.numRa + j, va_column_index(parts.lp, j, c), row);
}

std::size_t record_stream(CubeOfBitsArrays& cube, std::span<const IpPair> pairs, StreamOptions options) {
  const std::size_t batch = std::max<std::size_t>(options.batchSize, 1);
  const std::size_t batches = (pairs.size() + batch - 1) / batch;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(options.workers, 1u), std::max<std::size_t>(batches, 1)));

  if (workers == 1) {
    for (const IpPair& p : pairs) record_pair(cube, p);
    return pairs.size();
  }

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= batches) return;
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(pairs.size(), begin + batch);
      for (std::size_t k = begin; k < end; ++k) record_pair(cube, pairs[k]);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();  // joins
  return pairs.size();
}

}  // namespace cbaa
