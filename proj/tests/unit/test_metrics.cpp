#include <doctest.h>

#include <algorithm>
#include <random>

#include "cbaa/metrics.hpp"
#include "test_support.hpp"

using namespace cbaa;

namespace {

GroundTruth truth_of(std::initializer_list<std::pair<std::uint32_t, std::uint64_t>> hosts) {
  GroundTruth t;
  for (auto [ip, card] : hosts) {
    t.cardinalities[ip] = card;
    t.flowCount += card;
  }
  return t;
}

}  // namespace

TEST_CASE("exact cardinalities") {
  CHECK(exact_cardinalities({}).cardinalities.empty());
  CHECK(exact_cardinalities({}).flowCount == 0);

  const std::vector<IpPair> dup(7, IpPair{1, 2});
  const GroundTruth d = exact_cardinalities(dup);
  CHECK(d.cardinality(1) == 1);
  CHECK(d.flowCount == 1);

  std::vector<IpPair> pairs;
  std::mt19937_64 rng(3);
  testing::plant_host(pairs, 10, 300, rng);
  testing::plant_host(pairs, 20, 5, rng);
  auto shuffled = pairs;
  shuffled.insert(shuffled.end(), pairs.begin(), pairs.end());
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(1));
  const GroundTruth t = exact_cardinalities(shuffled);
  CHECK(t.cardinality(10) == 300);
  CHECK(t.cardinality(20) == 5);
  CHECK(t.cardinality(30) == 0);
  CHECK(t.flowCount == 305);
  CHECK(t.super_hosts(300) == std::vector<std::uint32_t>{10});
}

TEST_CASE("perfect and empty detections") {
  const GroundTruth t = truth_of({{1, 2000}, {2, 1500}, {3, 10}});
  const std::vector<std::uint32_t> perfect{1, 2};
  const MetricsReport m = score_detection(perfect, t, 1024);
  CHECK(*m.fnr == 0.0);
  CHECK(*m.fpr == 0.0);
  CHECK(*m.ftr == 0.0);

  GroundTruth ten;
  for (std::uint32_t i = 0; i < 10; ++i) ten.cardinalities[i] = 5000;
  const MetricsReport none = score_detection(std::span<const std::uint32_t>{}, ten, 1024);
  CHECK(*none.fnr == 1.0);
  CHECK(*none.fpr == 0.0);
  CHECK(none.missed == 10);
  CHECK_FALSE(none.precision.has_value());
}

TEST_CASE("hand-counted fixture") {
  // |H| = 4; one true host missed, two hosts below theta reported.
  const GroundTruth t = truth_of({{1, 2000}, {2, 3000}, {3, 1100}, {4, 1024 + 500}, {5, 10}, {6, 900}});
  const std::vector<std::uint32_t> detected{1, 2, 3, 5, 6};
  const MetricsReport m = score_detection(detected, t, 1024);
  CHECK(m.truthCount == 4);
  CHECK(m.missed == 1);
  CHECK(m.spurious == 2);
  CHECK(*m.fnr == 0.25);
  CHECK(*m.fpr == 0.5);
  CHECK(*m.ftr == 0.75);
  CHECK(*m.ftr == *m.fnr + *m.fpr);
  CHECK(*m.precision == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("boundary host counts as both true and spurious") {
  const GroundTruth t = truth_of({{1, 1024}, {2, 2000}});
  const std::vector<std::uint32_t> detected{1, 2};
  const MetricsReport m = score_detection(detected, t, 1024);
  CHECK(m.truthCount == 2);
  CHECK(m.missed == 0);
  CHECK(m.spurious == 1);
  CHECK(m.boundaryHosts == 1);
  CHECK(*m.fpr == 0.5);
}

TEST_CASE("no true super hosts leaves ratios undefined") {
  const GroundTruth t = truth_of({{1, 5}});
  const std::vector<std::uint32_t> detected{1, 99};
  const MetricsReport m = score_detection(detected, t, 1024);
  CHECK(m.truthCount == 0);
  CHECK_FALSE(m.fnr.has_value());
  CHECK_FALSE(m.fpr.has_value());
  CHECK_FALSE(m.ftr.has_value());
  CHECK(m.spurious == 2);  // unknown IPs have cardinality 0
}

TEST_CASE("records and plain IPs score the same") {
  const GroundTruth t = truth_of({{1, 2000}, {2, 3000}});
  const std::vector<SuperHostRecord> recs{{1, 1990.0, 0}, {7, 1500.0, 3}};
  const std::vector<std::uint32_t> ips{1, 7};
  const MetricsReport a = score_detection(recs, t, 1024);
  const MetricsReport b = score_detection(ips, t, 1024);
  CHECK(*a.fnr == *b.fnr);
  CHECK(*a.fpr == *b.fpr);
}
