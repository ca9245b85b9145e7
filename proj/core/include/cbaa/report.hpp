#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbaa/config.hpp"
#include "cbaa/metrics.hpp"
#include "cbaa/recovery.hpp"

namespace cbaa {

/// Reads a key=value config file. Unset keys keep the defaults; lists are
/// comma separated; integers may be decimal or 0x-prefixed. Throws
/// ConfigError when a key or value is bad or the result fails validation.
///
///   r, ra, va, g, cbn, clbs, mangle_a, mangle_b, bv_seed, va_seeds
SketchConfig parse_config(std::istream& in);
SketchConfig load_config_file(const std::string& path);

enum class ReportFormat { Text, Csv };

struct ReportContext {
  double theta = 0;
  std::vector<CsOverflow> overflows;
  std::optional<MetricsReport> metrics;
};

/// CSV: header "ip,estimate,cs_idx", one row per host; a metrics block of
/// "# key,value" comment lines follows when metrics are present.
void write_report(std::ostream& out, std::span<const SuperHostRecord> hosts, const ReportContext& ctx,
                  ReportFormat format);

/// Reads the host rows of a CSV report; comment lines are ignored.
std::vector<SuperHostRecord> read_report_csv(std::istream& in);

void write_metrics(std::ostream& out, const MetricsReport& m, double theta);

}  // namespace cbaa
