#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cbaa/metrics.hpp"
#include "cbaa/update.hpp"

namespace cbaa {

struct TraceRecord {
  std::uint32_t iip = 0;
  std::uint32_t oip = 0;
  std::optional<std::uint64_t> timestamp;  // seconds since epoch
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// text:       "A.B.C.D E.F.G.H [unix_ts]" per line, '#' starts a comment
// binary:     8-byte records, iip then oip, both big-endian
// binary-ts:  16-byte records, binary followed by a little-endian u64 timestamp
enum class TraceFormat { Text, Binary, BinaryTimestamped };

std::optional<TraceFormat> parse_trace_format(std::string_view name);

/// Unparseable input. `position()` is a 1-based line number for text and a
/// byte offset for binary formats.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::uint64_t position, const std::string& what)
      : std::runtime_error(what), position_(position) {}
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t position_;
};

std::optional<std::uint32_t> parse_ipv4(std::string_view text);
std::string format_ipv4(std::uint32_t ip);

std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format);
void write_trace(std::ostream& out, std::span<const TraceRecord> records, TraceFormat format);

std::vector<TraceRecord> read_trace_file(const std::string& path, TraceFormat format);
void write_trace_file(const std::string& path, std::span<const TraceRecord> records, TraceFormat format);

std::vector<IpPair> to_pairs(std::span<const TraceRecord> records);

struct TimeWindow {
  std::uint64_t start = 0;  // inclusive, multiple of the window length
  std::vector<TraceRecord> records;
};

/// Buckets records by floor(ts / windowSeconds) in ascending time order.
/// Throws std::invalid_argument on untimestamped records or a zero window.
std::vector<TimeWindow> split_windows(std::span<const TraceRecord> records, std::uint64_t windowSeconds);

struct Cidr {
  std::uint32_t network = 0;
  unsigned prefix = 0;
  bool contains(std::uint32_t ip) const {
    if (prefix == 0) return true;
    const std::uint32_t mask = ~std::uint32_t{0} << (32 - prefix);
    return (ip & mask) == (network & mask);
  }
};

std::optional<Cidr> parse_cidr(std::string_view text);

struct Classified {
  std::vector<TraceRecord> records;  // inner address first
  std::uint64_t skipped = 0;         // neither or both addresses inner
};

/// Orders each raw pair so the address inside `inner` comes first.
Classified classify_direction(std::span<const TraceRecord> raw, std::span<const Cidr> inner);

struct CardinalityRange {
  std::uint64_t min = 1;
  std::uint64_t max = 1;
};

struct PlantedGroup {
  std::uint64_t count = 0;
  CardinalityRange cardinality;
};

struct SynthSpec {
  std::uint64_t backgroundHosts = 0;
  CardinalityRange backgroundCardinality{1, 100};
  std::vector<PlantedGroup> planted;
  double duplicationFactor = 1.0;  // mean packets per flow, >= 1
  std::uint64_t seed = 1;
  // Timestamps are drawn uniformly from [startTime, startTime + durationSeconds)
  // when durationSeconds > 0; otherwise records are untimestamped.
  std::uint64_t startTime = 0;
  std::uint64_t durationSeconds = 0;
};

struct SynthTrace {
  std::vector<TraceRecord> records;
  GroundTruth truth;
};

/// Deterministic for a fixed spec. Inner IPs are distinct and every host's
/// outer IPs are distinct, so the truth equals the generator's plan.
SynthTrace synth_trace(const SynthSpec& spec);

}  // namespace cbaa
