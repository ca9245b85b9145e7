#include "cbaa/config.hpp"

#include <bit>

namespace cbaa {

namespace {

// Upper bound on cube size; anything larger is a typo, not a sketch.
constexpr std::uint64_t kMaxTotalBits = std::uint64_t{1} << 36;

}  // namespace

std::uint64_t SketchConfig::bitsPerSketch() const {
  std::uint64_t columns = 0;
  for (unsigned i = 0; i < arrayCount() && i < cbn.size(); ++i) columns += columnCount(i);
  return columns * g;
}

std::uint64_t SketchConfig::totalBits() const { return bitsPerSketch() << r; }

ColumnLayout column_layout(const SketchConfig& config) {
  ColumnLayout layout;
  const unsigned n = config.numRa;
  const unsigned w = config.lpWidth();
  layout.clbs = config.clbs;
  layout.epLen.resize(n);
  layout.cpLen.resize(n);
  for (unsigned i = 0; i < n; ++i) {
    const unsigned next = config.clbs[(i + 1) % n];
    layout.epLen[i] = (next + w - config.clbs[i]) % w;
    layout.cpLen[i] = static_cast<int>(config.cbn[i]) - static_cast<int>(layout.epLen[i]);
  }
  return layout;
}

void SketchConfig::validate() const {
  if (r > 31) throw ConfigError("r-range", "r must be in [0, 31], got " + std::to_string(r));
  if (numRa < 1) throw ConfigError("ra-count", "at least one restoring array is required");
  if (numRa > 255 || numVa > 255) throw ConfigError("array-count", "array counts must fit in a byte");
  if (cbn.size() != arrayCount())
    throw ConfigError("cbn-length", "expected " + std::to_string(arrayCount()) + " entries, got " +
                                        std::to_string(cbn.size()));
  if (clbs.size() != numRa)
    throw ConfigError("clbs-length", "expected " + std::to_string(numRa) + " entries, got " +
                                         std::to_string(clbs.size()));
  if (vaSeeds.size() != numVa)
    throw ConfigError("va-seeds-length", "expected " + std::to_string(numVa) + " entries, got " +
                                             std::to_string(vaSeeds.size()));
  if (g == 0 || !std::has_single_bit(g))
    throw ConfigError("g-power-of-two", "g must be a power of two, got " + std::to_string(g));
  if ((mangleA & 1u) == 0) throw ConfigError("mangle-a-odd", "mangleA must be odd");
  for (unsigned i = 0; i < arrayCount(); ++i) {
    if (cbn[i] > 31)
      throw ConfigError("cbn-range", "cbn(" + std::to_string(i) + ") must be at most 31");
  }

  const unsigned w = lpWidth();
  for (unsigned i = 0; i < numRa; ++i) {
    if (clbs[i] >= w)
      throw ConfigError("clbs-range", "clbs(" + std::to_string(i) + ")=" + std::to_string(clbs[i]) +
                                          " outside [0, " + std::to_string(w) + ")");
    if (i > 0 && clbs[i] <= clbs[i - 1])
      throw ConfigError("clbs-increasing", "clbs must be strictly increasing");
  }

  const ColumnLayout layout = column_layout(*this);
  unsigned epTotal = 0;
  for (unsigned e : layout.epLen) epTotal += e;
  if (epTotal != w)
    throw ConfigError("ep-partition", "efficient parts cover " + std::to_string(epTotal) +
                                          " LP bits, expected " + std::to_string(w));
  for (unsigned i = 0; i < numRa; ++i) {
    const int cp = layout.cpLen[i];
    const unsigned nextEp = layout.epLen[(i + 1) % numRa];
    if (cp < 0)
      throw ConfigError("cp-nonnegative", "cbn(" + std::to_string(i) + ") is shorter than its efficient part");
    if (static_cast<unsigned>(cp) > nextEp)
      throw ConfigError("cp-within-next-ep", "checking part of array " + std::to_string(i) +
                                                 " spills past the next efficient part");
  }

  if (totalBits() > kMaxTotalBits)
    throw ConfigError("cube-size", "cube would need " + std::to_string(totalBits()) + " bits");
}

std::string first_config_difference(const SketchConfig& a, const SketchConfig& b) {
  if (a.r != b.r) return "r";
  if (a.numRa != b.numRa) return "numRa";
  if (a.numVa != b.numVa) return "numVa";
  if (a.g != b.g) return "g";
  if (a.cbn != b.cbn) return "cbn";
  if (a.clbs != b.clbs) return "clbs";
  if (a.mangleA != b.mangleA) return "mangleA";
  if (a.mangleB != b.mangleB) return "mangleB";
  if (a.bvSeed != b.bvSeed) return "bvSeed";
  if (a.vaSeeds != b.vaSeeds) return "vaSeeds";
  return {};
}

SketchConfig default_config() { return SketchConfig{}; }

}  // namespace cbaa
