#include "cbaa/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <unordered_set>

namespace cbaa {

std::optional<TraceFormat> parse_trace_format(std::string_view name) {
  if (name == "text") return TraceFormat::Text;
  if (name == "binary") return TraceFormat::Binary;
  if (name == "binary-ts") return TraceFormat::BinaryTimestamped;
  return std::nullopt;
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t ip = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next == p || next - p > 3 || v > 255) return std::nullopt;
    ip = (ip << 8) | v;
    p = next;
  }
  if (p != end) return std::nullopt;
  return ip;
}

std::string format_ipv4(std::uint32_t ip) {
  return std::to_string(ip >> 24) + '.' + std::to_string((ip >> 16) & 0xFF) + '.' +
         std::to_string((ip >> 8) & 0xFF) + '.' + std::to_string(ip & 0xFF);
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<TraceRecord> parse_text(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::uint64_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto f = fields_of(view);
    if (f.empty()) continue;
    if (f.size() != 2 && f.size() != 3)
      throw TraceError(lineNo, "line " + std::to_string(lineNo) + ": expected 2 or 3 fields, got " +
                                   std::to_string(f.size()));
    TraceRecord rec;
    auto iip = parse_ipv4(f[0]);
    auto oip = parse_ipv4(f[1]);
    if (!iip || !oip)
      throw TraceError(lineNo, "line " + std::to_string(lineNo) + ": bad IPv4 address '" +
                                   std::string(iip ? f[1] : f[0]) + "'");
    rec.iip = *iip;
    rec.oip = *oip;
    if (f.size() == 3) {
      std::uint64_t ts = 0;
      auto [next, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), ts);
      if (ec != std::errc{} || next != f[2].data() + f[2].size())
        throw TraceError(lineNo, "line " + std::to_string(lineNo) + ": bad timestamp '" + std::string(f[2]) + "'");
      rec.timestamp = ts;
    }
    out.push_back(rec);
  }
  return out;
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void put_be32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (24 - 8 * i));
}

std::vector<TraceRecord> parse_binary(std::istream& in, bool timestamped) {
  const std::size_t size = timestamped ? 16 : 8;
  std::vector<TraceRecord> out;
  unsigned char buf[16];
  std::uint64_t offset = 0;
  for (;;) {
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(size));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != size)
      throw TraceError(offset, "truncated record at byte " + std::to_string(offset) + ": " + std::to_string(got) +
                                   " of " + std::to_string(size) + " bytes");
    TraceRecord rec{be32(buf), be32(buf + 4), std::nullopt};
    if (timestamped) {
      std::uint64_t ts = 0;
      for (int i = 0; i < 8; ++i) ts |= std::uint64_t{buf[8 + i]} << (8 * i);
      rec.timestamp = ts;
    }
    out.push_back(rec);
    offset += size;
  }
  return out;
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format) {
  switch (format) {
    case TraceFormat::Text:
      return parse_text(in);
    case TraceFormat::Binary:
      return parse_binary(in, false);
    case TraceFormat::BinaryTimestamped:
      return parse_binary(in, true);
  }
  return {};
}

void write_trace(std::ostream& out, std::span<const TraceRecord> records, TraceFormat format) {
  if (format == TraceFormat::Text) {
    for (const auto& r : records) {
      out << format_ipv4(r.iip) << ' ' << format_ipv4(r.oip);
      if (r.timestamp) out << ' ' << *r.timestamp;
      out << '\n';
    }
    return;
  }
  const bool timestamped = format == TraceFormat::BinaryTimestamped;
  unsigned char buf[16];
  for (const auto& r : records) {
    put_be32(buf, r.iip);
    put_be32(buf + 4, r.oip);
    if (timestamped) {
      const std::uint64_t ts = r.timestamp.value_or(0);
      for (int i = 0; i < 8; ++i) buf[8 + i] = static_cast<unsigned char>(ts >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(buf), timestamped ? 16 : 8);
  }
}

std::vector<TraceRecord> read_trace_file(const std::string& path, TraceFormat format) {
  std::ifstream in(path, format == TraceFormat::Text ? std::ios::in : std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_trace(in, format);
}

void write_trace_file(const std::string& path, std::span<const TraceRecord> records, TraceFormat format) {
  std::ofstream out(path, format == TraceFormat::Text ? std::ios::out : std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace(out, records, format);
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::vector<IpPair> to_pairs(std::span<const TraceRecord> records) {
  std::vector<IpPair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.iip, r.oip});
  return out;
}

std::vector<TimeWindow> split_windows(std::span<const TraceRecord> records, std::uint64_t windowSeconds) {
  if (windowSeconds == 0) throw std::invalid_argument("window length must be positive");
  std::map<std::uint64_t, std::vector<TraceRecord>> buckets;
  for (const auto& r : records) {
    if (!r.timestamp) throw std::invalid_argument("windowing requires timestamped records");
    buckets[*r.timestamp / windowSeconds].push_back(r);
  }
  std::vector<TimeWindow> out;
  out.reserve(buckets.size());
  for (auto& [index, recs] : buckets) out.push_back({index * windowSeconds, std::move(recs)});
  return out;
}

std::optional<Cidr> parse_cidr(std::string_view text) {
  const auto slash = text.find('/');
  const auto ip = parse_ipv4(text.substr(0, slash));
  if (!ip) return std::nullopt;
  unsigned prefix = 32;
  if (slash != std::string_view::npos) {
    const auto digits = text.substr(slash + 1);
    auto [next, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), prefix);
    if (ec != std::errc{} || next != digits.data() + digits.size() || prefix > 32) return std::nullopt;
  }
  return Cidr{*ip, prefix};
}

Classified classify_direction(std::span<const TraceRecord> raw, std::span<const Cidr> inner) {
  auto isInner = [&](std::uint32_t ip) {
    return std::any_of(inner.begin(), inner.end(), [ip](const Cidr& c) { return c.contains(ip); });
  };
  Classified out;
  for (const auto& r : raw) {
    const bool a = isInner(r.iip);
    const bool b = isInner(r.oip);
    if (a == b) {
      ++out.skipped;
    } else if (a) {
      out.records.push_back(r);
    } else {
      out.records.push_back({r.oip, r.iip, r.timestamp});
    }
  }
  return out;
}

namespace {

// Draws are built from raw engine output so a seed yields the same trace
// with any standard library.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  std::uint32_t next32() { return static_cast<std::uint32_t>(engine_() >> 32); }

  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    const u128 m = static_cast<u128>(engine_()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t between(CardinalityRange r) { return r.min + below(r.max - r.min + 1); }

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    for (double p = unit(); p > limit; p *= unit()) ++k;
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

SynthTrace synth_trace(const SynthSpec& spec) {
  SynthRng rng(spec.seed);
  SynthTrace out;

  std::vector<CardinalityRange> plan;
  for (const auto& group : spec.planted)
    for (std::uint64_t i = 0; i < group.count; ++i) plan.push_back(group.cardinality);
  for (std::uint64_t i = 0; i < spec.backgroundHosts; ++i) plan.push_back(spec.backgroundCardinality);

  std::unordered_set<std::uint32_t> usedInner;
  usedInner.reserve(plan.size() * 2);
  std::unordered_set<std::uint32_t> opposites;
  const double extraPackets = std::max(spec.duplicationFactor, 1.0) - 1.0;

  for (const CardinalityRange& range : plan) {
    std::uint32_t iip;
    do iip = rng.next32();
    while (!usedInner.insert(iip).second);

    const std::uint64_t card = rng.between(range);
    opposites.clear();
    while (opposites.size() < card) {
      const std::uint32_t oip = rng.next32();
      if (!opposites.insert(oip).second) continue;
      const std::uint64_t packets = 1 + rng.poisson(extraPackets);
      for (std::uint64_t k = 0; k < packets; ++k) {
        TraceRecord rec{iip, oip, std::nullopt};
        if (spec.durationSeconds > 0) rec.timestamp = spec.startTime + rng.below(spec.durationSeconds);
        out.records.push_back(rec);
      }
    }
    if (card > 0) out.truth.cardinalities[iip] = card;
    out.truth.flowCount += card;
  }

  for (std::size_t i = out.records.size(); i > 1; --i) std::swap(out.records[i - 1], out.records[rng.below(i)]);
  return out;
}

}  // namespace cbaa
