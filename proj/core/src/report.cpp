#include "cbaa/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cbaa/trace.hpp"

namespace cbaa {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const std::string& key, const std::string& text, std::uint64_t max) {
  std::string_view v = text;
  int base = 10;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  auto [next, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc{} || next != v.data() + v.size() || out > max)
    throw ConfigError("config-value", "bad value for '" + key + "': '" + text + "'");
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text, std::uint64_t max) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<T>(parse_uint(key, trim(item), max)));
  return out;
}

std::string format_estimate(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string format_ratio(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

SketchConfig parse_config(std::istream& in) {
  SketchConfig c = default_config();
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config-syntax", "expected key=value, got '" + t + "'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "r") {
      c.r = static_cast<unsigned>(parse_uint(key, value, 31));
    } else if (key == "ra") {
      c.numRa = static_cast<unsigned>(parse_uint(key, value, 255));
    } else if (key == "va") {
      c.numVa = static_cast<unsigned>(parse_uint(key, value, 255));
    } else if (key == "g") {
      c.g = static_cast<std::uint32_t>(parse_uint(key, value, 0xFFFFFFFFu));
    } else if (key == "cbn") {
      c.cbn = parse_list<unsigned>(key, value, 255);
    } else if (key == "clbs") {
      c.clbs = parse_list<unsigned>(key, value, 255);
    } else if (key == "mangle_a") {
      c.mangleA = static_cast<std::uint32_t>(parse_uint(key, value, 0xFFFFFFFFu));
    } else if (key == "mangle_b") {
      c.mangleB = static_cast<std::uint32_t>(parse_uint(key, value, 0xFFFFFFFFu));
    } else if (key == "bv_seed") {
      c.bvSeed = static_cast<std::uint32_t>(parse_uint(key, value, 0xFFFFFFFFu));
    } else if (key == "va_seeds") {
      c.vaSeeds = parse_list<std::uint32_t>(key, value, 0xFFFFFFFFu);
    } else {
      throw ConfigError("config-key", "unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

SketchConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_config(in);
}

void write_metrics(std::ostream& out, const MetricsReport& m, double theta) {
  out << "# theta," << theta << '\n'
      << "# true_super_hosts," << m.truthCount << '\n'
      << "# detected," << m.detectedCount << '\n'
      << "# missed," << m.missed << '\n'
      << "# spurious," << m.spurious << '\n'
      << "# fnr," << format_ratio(m.fnr) << '\n'
      << "# fpr," << format_ratio(m.fpr) << '\n'
      << "# ftr," << format_ratio(m.ftr) << '\n'
      << "# precision_nonstandard," << format_ratio(m.precision) << '\n';
  if (m.boundaryHosts > 0)
    out << "# warning,boundary hosts at cardinality == theta counted as both true and spurious: "
        << m.boundaryHosts << '\n';
}

void write_report(std::ostream& out, std::span<const SuperHostRecord> hosts, const ReportContext& ctx,
                  ReportFormat format) {
  if (format == ReportFormat::Csv) {
    out << "ip,estimate,cs_idx\n";
    for (const auto& h : hosts) out << format_ipv4(h.ip) << ',' << format_estimate(h.estimate) << ',' << h.csIdx << '\n';
    for (const auto& o : ctx.overflows)
      out << "# overflow,cs " << o.csIdx << " skipped with " << o.tupleCount << " tuples\n";
    if (ctx.metrics) write_metrics(out, *ctx.metrics, ctx.theta);
    return;
  }

  out << "super hosts (theta=" << ctx.theta << "): " << hosts.size() << '\n';
  for (const auto& h : hosts) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-15s  est %12s  cs %u\n", format_ipv4(h.ip).c_str(),
                  format_estimate(h.estimate).c_str(), h.csIdx);
    out << line;
  }
  for (const auto& o : ctx.overflows)
    out << "  overflow: cs " << o.csIdx << " skipped, " << o.tupleCount << " candidate tuples\n";
  if (ctx.metrics) {
    const auto& m = *ctx.metrics;
    out << "metrics: |H|=" << m.truthCount << " detected=" << m.detectedCount << " missed=" << m.missed
        << " spurious=" << m.spurious << '\n'
        << "  FNR=" << format_ratio(m.fnr) << " FPR=" << format_ratio(m.fpr) << " FTR=" << format_ratio(m.ftr) << '\n'
        << "  precision (not part of FNR/FPR)=" << format_ratio(m.precision) << '\n';
    if (m.boundaryHosts > 0)
      out << "  note: " << m.boundaryHosts << " detected host(s) sit exactly at theta and count as both true and spurious\n";
  }
}

std::vector<SuperHostRecord> read_report_csv(std::istream& in) {
  std::vector<SuperHostRecord> out;
  std::string line;
  std::uint64_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t == "ip,estimate,cs_idx") continue;
    std::stringstream ss(t);
    std::string ip, est, cs;
    std::getline(ss, ip, ',');
    std::getline(ss, est, ',');
    std::getline(ss, cs, ',');
    const auto parsed = parse_ipv4(ip);
    if (!parsed || est.empty() || cs.empty())
      throw TraceError(lineNo, "report line " + std::to_string(lineNo) + ": expected ip,estimate,cs_idx");
    SuperHostRecord rec;
    rec.ip = *parsed;
    try {
      rec.estimate = est == "inf" ? HUGE_VAL : std::stod(est);
      rec.csIdx = static_cast<std::uint32_t>(std::stoul(cs));
    } catch (const std::exception&) {
      throw TraceError(lineNo, "report line " + std::to_string(lineNo) + ": bad number");
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace cbaa
