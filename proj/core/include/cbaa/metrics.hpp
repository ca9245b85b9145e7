#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cbaa/recovery.hpp"
#include "cbaa/update.hpp"

namespace cbaa {

/// Exact distinct-opposite counts per inner IP.
struct GroundTruth {
  std::unordered_map<std::uint32_t, std::uint64_t> cardinalities;
  std::uint64_t flowCount = 0;  // sum of all cardinalities

  std::uint64_t cardinality(std::uint32_t ip) const {
    auto it = cardinalities.find(ip);
    return it == cardinalities.end() ? 0 : it->second;
  }

  /// Inner IPs with cardinality >= theta, ascending.
  std::vector<std::uint32_t> super_hosts(double theta) const;
};

GroundTruth exact_cardinalities(std::span<const IpPair> pairs);

struct MetricsReport {
  std::uint64_t truthCount = 0;     // |H|, hosts with cardinality >= theta
  std::uint64_t detectedCount = 0;  // distinct detected IPs
  std::uint64_t missed = 0;         // H minus detected
  std::uint64_t spurious = 0;       // detected with cardinality <= theta
  std::uint64_t boundaryHosts = 0;  // detected with cardinality exactly theta (counted in both H and spurious)

  // Ratios normalized by |H|; absent when |H| == 0.
  std::optional<double> fnr;
  std::optional<double> fpr;
  std::optional<double> ftr;

  // Not one of the reported ratios above: fraction of detections that are true super hosts.
  std::optional<double> precision;
};

MetricsReport score_detection(std::span<const std::uint32_t> detectedIps, const GroundTruth& truth, double theta);
MetricsReport score_detection(std::span<const SuperHostRecord> detected, const GroundTruth& truth, double theta);

}  // namespace cbaa
