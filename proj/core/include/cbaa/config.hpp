#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbaa {

/// Structural parameters of a sketch family. Two cubes can only be merged
/// when their configs compare equal, seeds included.
struct SketchConfig {
  unsigned r = 4;         // low-order IP bits that select a cardinality sketch
  unsigned numRa = 3;     // restoring arrays
  unsigned numVa = 1;     // validating arrays
  std::uint32_t g = 4096; // rows per column

  std::vector<unsigned> cbn{12, 12, 12, 12};  // column-index width, per array
  std::vector<unsigned> clbs{0, 10, 20};      // LP-relative start offsets, restoring arrays only

  std::uint32_t mangleA = 0x9E3779B1u;  // odd
  std::uint32_t mangleB = 0x7F4A7C15u;
  std::vector<std::uint32_t> vaSeeds{0x85EBCA6Bu};
  std::uint32_t bvSeed = 0xC2B2AE35u;

  unsigned arrayCount() const { return numRa + numVa; }
  unsigned lpWidth() const { return 32u - r; }
  std::uint32_t sketchCount() const { return std::uint32_t{1} << r; }
  std::uint64_t columnCount(unsigned array) const { return std::uint64_t{1} << cbn[array]; }

  /// Bits in one cardinality sketch (all arrays).
  std::uint64_t bitsPerSketch() const;
  std::uint64_t totalBits() const;

  /// Throws ConfigError naming the first violated rule.
  void validate() const;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// Thrown for configs that break a structural invariant. `rule()` is a short
/// stable identifier of the violated rule.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string rule, const std::string& detail)
      : std::invalid_argument(rule + ": " + detail), rule_(std::move(rule)) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

/// Efficient/checking part lengths of each restoring array's column index.
struct ColumnLayout {
  std::vector<unsigned> epLen;
  std::vector<int> cpLen;  // signed so a broken config can be reported, not wrapped
  std::vector<unsigned> clbs;
};

/// Computes EP/CP lengths from offsets. Does not validate; see SketchConfig::validate.
ColumnLayout column_layout(const SketchConfig& config);

/// First field on which two configs differ, or empty when equal.
std::string first_config_difference(const SketchConfig& a, const SketchConfig& b);

/// Full-scale defaults (a 128 MiB cube): r=4, 3 restoring + 1 validating array, g=4096,
/// 4096 columns per array, clbs={0,10,20}.
SketchConfig default_config();

}  // namespace cbaa
