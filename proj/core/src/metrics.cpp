#include "cbaa/metrics.hpp"

#include <algorithm>
#include <unordered_set>

namespace cbaa {

std::vector<std::uint32_t> GroundTruth::super_hosts(double theta) const {
  std::vector<std::uint32_t> out;
  for (const auto& [ip, card] : cardinalities)
    if (static_cast<double>(card) >= theta) out.push_back(ip);
  std::sort(out.begin(), out.end());
  return out;
}

GroundTruth exact_cardinalities(std::span<const IpPair> pairs) {
  std::vector<std::uint64_t> keys;
  keys.reserve(pairs.size());
  for (const IpPair& p : pairs) keys.push_back((std::uint64_t{p.iip} << 32) | p.oip);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  GroundTruth truth;
  for (std::uint64_t k : keys) ++truth.cardinalities[static_cast<std::uint32_t>(k >> 32)];
  truth.flowCount = keys.size();
  return truth;
}

MetricsReport score_detection(std::span<const std::uint32_t> detectedIps, const GroundTruth& truth, double theta) {
  std::unordered_set<std::uint32_t> detected(detectedIps.begin(), detectedIps.end());
  MetricsReport m;
  m.detectedCount = detected.size();

  const auto trueHosts = truth.super_hosts(theta);
  m.truthCount = trueHosts.size();
  for (std::uint32_t h : trueHosts)
    if (!detected.contains(h)) ++m.missed;

  std::uint64_t correct = 0;
  for (std::uint32_t h : detected) {
    const double card = static_cast<double>(truth.cardinality(h));
    if (card <= theta) ++m.spurious;
    if (card == theta) ++m.boundaryHosts;
    if (card >= theta) ++correct;
  }

  if (m.truthCount > 0) {
    const double n = static_cast<double>(m.truthCount);
    m.fnr = static_cast<double>(m.missed) / n;
    m.fpr = static_cast<double>(m.spurious) / n;
    m.ftr = *m.fnr + *m.fpr;
  }
  if (m.detectedCount > 0) m.precision = static_cast<double>(correct) / static_cast<double>(m.detectedCount);
  return m;
}

MetricsReport score_detection(std::span<const SuperHostRecord> detected, const GroundTruth& truth, double theta) {
  std::vector<std::uint32_t> ips;
  ips.reserve(detected.size());
  for (const auto& r : detected) ips.push_back(r.ip);
  return score_detection(ips, truth, theta);
}

}  // namespace cbaa
