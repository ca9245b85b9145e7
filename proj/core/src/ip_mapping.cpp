#include "cbaa/ip_mapping.hpp"

#include <cassert>

namespace cbaa {

namespace {

std::uint32_t width_mask(unsigned w) { return w >= 32 ? ~0u : (std::uint32_t{1} << w) - 1; }

// Rotate left within a w-bit field.
std::uint32_t rotl_in(std::uint32_t x, unsigned s, unsigned w) {
  s %= w;
  if (s == 0) return x;
  return ((x << s) | (x >> (w - s))) & width_mask(w);
}

std::uint32_t rotr_in(std::uint32_t x, unsigned s, unsigned w) { return rotl_in(x, (w - s % w) % w, w); }

}  // namespace

std::uint32_t ra_column_index(std::uint32_t lp, unsigned i, const SketchConfig& c) {
  const unsigned w = c.lpWidth();
  const unsigned width = c.cbn[i];
  if (width == 0) return 0;
  // Bring offset clbs(i) to the top of the field, then keep the top cbn(i) bits.
  const std::uint32_t rotated = rotl_in(lp & width_mask(w), c.clbs[i], w);
  return rotated >> (w - width);
}

ColumnTuple tuple_of(std::uint32_t lp, const SketchConfig& c) {
  ColumnTuple t(c.numRa);
  for (unsigned i = 0; i < c.numRa; ++i) t[i] = ra_column_index(lp, i, c);
  return t;
}

std::optional<std::uint32_t> lp_from_tuple(std::span<const std::uint32_t> cols, const SketchConfig& c) {
  assert(cols.size() == c.numRa);
  const ColumnLayout layout = column_layout(c);
  const unsigned n = c.numRa;
  const unsigned w = c.lpWidth();

  for (unsigned i = 0; i < n; ++i) {
    const unsigned cp = static_cast<unsigned>(layout.cpLen[i]);
    if (cp == 0) continue;
    const unsigned next = (i + 1) % n;
    const std::uint32_t tail = cols[i] & width_mask(cp);
    const std::uint32_t head = cols[next] >> (c.cbn[next] - cp);
    if (tail != head) return std::nullopt;
  }

  std::uint32_t lp = 0;
  [[maybe_unused]] std::uint32_t covered = 0;
  for (unsigned i = 0; i < n; ++i) {
    const unsigned ep = layout.epLen[i];
    const std::uint32_t efficient = cols[i] >> static_cast<unsigned>(layout.cpLen[i]);
    // Place the segment at the top of the field, then rotate it down to offset clbs(i).
    const std::uint32_t placed = rotr_in(efficient << (w - ep), c.clbs[i], w);
    assert((covered & placed) == 0);
    covered |= rotr_in(width_mask(ep) << (w - ep), c.clbs[i], w);
    lp |= placed;
  }
  assert(covered == width_mask(w));
  return lp;
}

}  // namespace cbaa
