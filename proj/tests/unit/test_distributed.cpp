#include <doctest.h>

#include <algorithm>
#include <random>

#include "cbaa/distributed.hpp"
#include "cbaa/recovery.hpp"
#include "test_support.hpp"

using namespace cbaa;

namespace {

std::vector<std::byte> to_bytes(std::initializer_list<int> v) {
  std::vector<std::byte> out;
  for (int b : v) out.push_back(static_cast<std::byte>(b));
  return out;
}

std::string parse_error_field(std::span<const std::byte> bytes) {
  try {
    deserialize(bytes);
  } catch (const ParseError& e) {
    return e.field();
  }
  return {};
}

}  // namespace

TEST_CASE("header layout is bit exact") {
  SketchConfig c = testing::small_config();
  c.mangleA = 0x01020305u;
  c.mangleB = 0xA0B0C0D0u;
  c.bvSeed = 0x11223344u;
  c.vaSeeds = {0x55667788u};
  CubeOfBitsArrays cube(c);
  const auto bytes = serialize(cube);
  const auto expected = to_bytes({'C', 'B', 'A', '1', 1, 0,  // magic, version
                                  2, 3, 1,                    // r, numRa, numVa
                                  64, 0, 0, 0,                // g
                                  12, 12, 12, 12,             // cbn
                                  0, 10, 20,                  // clbs
                                  0x05, 0x03, 0x02, 0x01,     // mangleA
                                  0xD0, 0xC0, 0xB0, 0xA0,     // mangleB
                                  0x44, 0x33, 0x22, 0x11,     // bvSeed
                                  0x88, 0x77, 0x66, 0x55,     // vaSeeds
                                  0x00, 0x00, 0x08, 0, 0, 0, 0, 0});  // payload length 2^19
  REQUIRE(bytes.size() == expected.size() + (std::size_t{1} << 19));
  CHECK(std::equal(expected.begin(), expected.end(), bytes.begin()));
}

TEST_CASE("payload bit order") {
  CubeOfBitsArrays cube(testing::small_config());
  cube.set_bit(0, 0, 0, 0);   // global bit 0
  cube.set_bit(0, 0, 0, 11);  // global bit 11 -> byte 1, bit 3
  cube.set_bit(1, 0, 0, 0);   // first bit of sketch 1
  const auto bytes = serialize(cube);
  const std::size_t header = bytes.size() - (std::size_t{1} << 19);
  CHECK(bytes[header] == std::byte{0x01});
  CHECK(bytes[header + 1] == std::byte{0x08});
  const std::size_t sketchBytes = 4 * 4096 * 64 / 8;
  CHECK(bytes[header + sketchBytes] == std::byte{0x01});
}

TEST_CASE("round trip is bit identical") {
  const SketchConfig c = testing::small_config();
  CubeOfBitsArrays empty(c);
  CHECK(deserialize(serialize(empty)) == empty);

  CubeOfBitsArrays cube(c);
  record_stream(cube, testing::random_pairs(100000, 8, 5000));
  const CubeOfBitsArrays back = deserialize(serialize(cube));
  CHECK(back == cube);
  CHECK(back.config() == cube.config());
  CHECK(serialize(back) == serialize(cube));
}

TEST_CASE("parse errors name the field") {
  CubeOfBitsArrays cube(testing::small_config());
  auto bytes = serialize(cube);

  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 10);
    try {
      deserialize(bytes);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.field() == "payload");
      CHECK(std::string(e.what()).find("524288") != std::string::npos);
      CHECK(std::string(e.what()).find("524278") != std::string::npos);
    }
  }
  SUBCASE("magic") {
    bytes[0] = std::byte{'X'};
    CHECK(parse_error_field(bytes) == "magic");
  }
  SUBCASE("version") {
    bytes[4] = std::byte{2};
    CHECK(parse_error_field(bytes) == "version");
  }
  SUBCASE("bad config") {
    bytes[9] = std::byte{3};  // g = 3
    CHECK(parse_error_field(bytes) == "config");
  }
  SUBCASE("declared length") {
    bytes[36] = std::byte{1};
    CHECK(parse_error_field(bytes) == "payload length");
  }
  SUBCASE("truncated header") {
    bytes.resize(15);
    CHECK(!parse_error_field(bytes).empty());
  }
}

TEST_CASE("partitioning") {
  const auto pairs = testing::random_pairs(20000, 4, 300);
  auto sorted = [](std::vector<IpPair> v) {
    std::sort(v.begin(), v.end(), [](IpPair a, IpPair b) { return std::tie(a.iip, a.oip) < std::tie(b.iip, b.oip); });
    return v;
  };

  for (auto mode : {PartitionMode::HashByPair, PartitionMode::HashByInner, PartitionMode::RoundRobin}) {
    const auto one = partition_trace(pairs, {mode, 1});
    REQUIRE(one.size() == 1);
    CHECK(one[0] == pairs);

    for (unsigned routers : {2u, 4u, 8u}) {
      const auto parts = partition_trace(pairs, {mode, routers});
      REQUIRE(parts.size() == routers);
      std::vector<IpPair> joined;
      for (const auto& p : parts) joined.insert(joined.end(), p.begin(), p.end());
      CHECK(sorted(joined) == sorted(pairs));
    }
  }

  const PartitionPolicy byPair{PartitionMode::HashByPair, 8};
  const PartitionPolicy byInner{PartitionMode::HashByInner, 8};
  CHECK(route_pair({1, 2}, 0, byPair) == route_pair({1, 2}, 999, byPair));
  CHECK(route_pair({1, 2}, 0, byInner) == route_pair({1, 3}, 5, byInner));
  CHECK(parse_partition_mode("round-robin") == PartitionMode::RoundRobin);
  CHECK_FALSE(parse_partition_mode("random").has_value());
}

TEST_CASE("global merge equals the centralized cube") {
  const SketchConfig c = testing::small_config();
  const auto pairs = testing::random_pairs(100000, 12, 4000);
  CubeOfBitsArrays central(c);
  record_stream(central, pairs);

  for (auto mode : {PartitionMode::HashByPair, PartitionMode::HashByInner, PartitionMode::RoundRobin}) {
    for (unsigned routers : {2u, 4u, 8u}) {
      std::vector<std::vector<std::byte>> files;
      for (const auto& part : partition_trace(pairs, {mode, routers})) {
        CubeOfBitsArrays local(c);
        record_stream(local, part);
        files.push_back(serialize(local));
      }
      CHECK(global_merge(files) == central);
      std::reverse(files.begin(), files.end());
      CHECK(global_merge(files) == central);
    }
  }
}

TEST_CASE("global merge edge cases") {
  const SketchConfig c = testing::small_config();
  CubeOfBitsArrays cube(c);
  record_stream(cube, testing::random_pairs(1000, 1));
  const std::vector<std::vector<std::byte>> single{serialize(cube)};
  CHECK(global_merge(single) == cube);

  CHECK_THROWS_AS(global_merge(std::span<const std::vector<std::byte>>{}), std::logic_error);

  SketchConfig other = c;
  other.mangleB ^= 0x10;
  const std::vector<std::vector<std::byte>> mixed{serialize(cube), serialize(cube), serialize(CubeOfBitsArrays(other))};
  try {
    global_merge(mixed);
    FAIL("expected a merge error");
  } catch (const MergeError& e) {
    const std::string what = e.what();
    CHECK(what.find("file #0") != std::string::npos);
    CHECK(what.find("file #2") != std::string::npos);
    CHECK(what.find("mangleB") != std::string::npos);
  }
}

TEST_CASE("sketch files on disk") {
  const SketchConfig c = testing::small_config();
  CubeOfBitsArrays cube(c);
  record_stream(cube, testing::random_pairs(5000, 2));
  const auto path = std::filesystem::temp_directory_path() / "cbaa_test_sketch.cba";
  write_sketch_file(path, cube);
  CHECK(read_sketch_file(path) == cube);
  std::filesystem::remove(path);
}
