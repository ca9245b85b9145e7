#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbaa/sketch.hpp"
#include "cbaa/update.hpp"

namespace cbaa {

// Sketch file layout, all integers little-endian:
//   "CBA1"  u16 version=1  u8 r  u8 numRa  u8 numVa  u32 g
//   (numRa+numVa) x u8 cbn   numRa x u8 clbs
//   u32 mangleA  u32 mangleB  u32 bvSeed  numVa x u32 vaSeeds
//   u64 payload byte length  payload (global bit k = byte k/8, bit k%8)

inline constexpr std::uint16_t kSketchFileVersion = 1;

/// Malformed sketch file. `field()` names the offending header field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& detail)
      : std::runtime_error(field + ": " + detail), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

std::vector<std::byte> serialize(const CubeOfBitsArrays& cube);
CubeOfBitsArrays deserialize(std::span<const std::byte> bytes);

/// Header only; payload is neither read nor checked.
SketchConfig read_config(std::span<const std::byte> bytes);

void write_sketch_file(const std::filesystem::path& path, const CubeOfBitsArrays& cube);
CubeOfBitsArrays read_sketch_file(const std::filesystem::path& path);
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);

enum class PartitionMode { HashByPair, HashByInner, RoundRobin };

struct PartitionPolicy {
  PartitionMode mode = PartitionMode::HashByPair;
  unsigned routerCount = 1;
};

std::optional<PartitionMode> parse_partition_mode(const std::string& name);
const char* to_string(PartitionMode mode);

/// Router a pair lands on; position is only used by round-robin.
unsigned route_pair(IpPair pair, std::size_t position, const PartitionPolicy& policy);

/// Disjoint cover of the input, one sequence per router, input order preserved within each.
std::vector<std::vector<IpPair>> partition_trace(std::span<const IpPair> pairs, const PartitionPolicy& policy);

/// Folds serialized local cubes into a global cube one file at a time, so
/// only the running result and the current input are held in memory.
class GlobalMerger {
 public:
  /// `label` identifies the input in error messages.
  void add(std::span<const std::byte> file, const std::string& label);
  void add(CubeOfBitsArrays cube, const std::string& label);

  bool empty() const { return !cube_; }
  /// Throws std::logic_error when nothing was added.
  CubeOfBitsArrays take();

 private:
  std::optional<CubeOfBitsArrays> cube_;
  std::string firstLabel_;
};

/// Merges every file; on config mismatch names both files and the field.
CubeOfBitsArrays global_merge(std::span<const std::vector<std::byte>> files);

}  // namespace cbaa
