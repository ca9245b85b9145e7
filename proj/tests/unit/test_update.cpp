#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cbaa/ip_mapping.hpp"
#include "cbaa/update.hpp"
#include "test_support.hpp"

using namespace cbaa;

TEST_CASE("one pair sets one bit per array") {
  const SketchConfig c = testing::small_config();
  CubeOfBitsArrays cube(c);
  const IpPair pair{0xC0A80101u, 0x08080808u};
  record_pair(cube, pair);
  CHECK(cube.popcount() == c.arrayCount());

  const IpParts parts = split_ip(mangle(pair.iip, c), c);
  const std::uint32_t row = row_index(mangle(pair.oip, c).value, c);
  for (unsigned i = 0; i < c.numRa; ++i) CHECK(cube.test_bit(parts.rp, i, ra_column_index(parts.lp, i, c), row));
  CHECK(cube.test_bit(parts.rp, c.numRa, va_column_index(parts.lp, 0, c), row));

  const CubeOfBitsArrays once = cube;
  record_pair(cube, pair);
  CHECK(cube == once);
}

TEST_CASE("one host's columns track its distinct rows") {
  SketchConfig c = testing::small_config();
  c.g = 4096;
  CubeOfBitsArrays cube(c);
  const std::uint32_t iip = 0x0A000001u;
  std::mt19937 rng(11);
  std::set<std::uint32_t> rows;
  for (int k = 0; k < 200; ++k) {
    const auto oip = static_cast<std::uint32_t>(rng());
    record_pair(cube, {iip, oip});
    record_pair(cube, {iip, oip});
    rows.insert(row_index(mangle(oip, c).value, c));
  }
  const IpParts parts = split_ip(mangle(iip, c), c);
  std::vector<std::uint32_t> cols;
  for (unsigned i = 0; i < c.numRa; ++i) cols.push_back(ra_column_index(parts.lp, i, c));
  cols.push_back(va_column_index(parts.lp, 0, c));
  for (unsigned a = 0; a < c.arrayCount(); ++a)
    CHECK(cube.zero_count_column(parts.rp, a, cols[a]) == c.g - rows.size());
  CHECK(cube.union_columns(parts.rp, cols).zeroCount == c.g - rows.size());
}

TEST_CASE("record_stream: empty, order and duplicates") {
  const SketchConfig c = testing::small_config();
  CubeOfBitsArrays empty(c);
  CHECK(record_stream(empty, {}) == 0);
  CHECK(empty.popcount() == 0);

  auto pairs = testing::random_pairs(50000, 21, 500);
  CubeOfBitsArrays a(c);
  CHECK(record_stream(a, pairs) == pairs.size());

  auto doubled = pairs;
  doubled.insert(doubled.end(), pairs.begin(), pairs.end());
  std::shuffle(doubled.begin(), doubled.end(), std::mt19937(2));
  CubeOfBitsArrays b(c);
  record_stream(b, doubled);
  CHECK(a == b);
}

TEST_CASE("parallel workers and batch sizes give the same cube") {
  const SketchConfig c = testing::small_config();
  const auto pairs = testing::random_pairs(300000, 22, 2000);
  CubeOfBitsArrays serial(c);
  record_stream(serial, pairs, {1, 64 * 1024});
  for (unsigned workers : {2u, 8u}) {
    for (std::size_t batch : {std::size_t{1} << 10, std::size_t{64} * 1024, std::size_t{1} << 20}) {
      CubeOfBitsArrays parallel(c);
      CHECK(record_stream(parallel, pairs, {workers, batch}) == pairs.size());
      CHECK(parallel == serial);
    }
  }
}
