#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "cbaa/estimator.hpp"
#include "cbaa/ip_mapping.hpp"
#include "cbaa/update.hpp"
#include "test_support.hpp"

using namespace cbaa;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Zero count of a g-bit vector after hashing n distinct items to uniform rows.
std::uint32_t simulate_column(std::uint32_t g, std::uint32_t n, std::mt19937_64& rng) {
  std::vector<bool> bits(g);
  for (std::uint32_t i = 0; i < n; ++i) bits[rng() % g] = true;
  return static_cast<std::uint32_t>(std::count(bits.begin(), bits.end(), false));
}

}  // namespace

TEST_CASE("linear estimate values") {
  CHECK(linear_estimate(4096, 4096) == 0.0);
  // 4096 ln 2 evaluated to 30 digits: 2839.13085157353598737...
  CHECK(linear_estimate(4096, 2048) == doctest::Approx(2839.130851573536).epsilon(1e-14));
  CHECK(std::isinf(linear_estimate(4096, 0)));
  CHECK(linear_estimate(4096, 0) == kSaturated);
}

TEST_CASE("linear counting is accurate on simulated columns") {
  for (std::uint32_t n : {256u, 1000u, 1024u, 2048u}) {
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed * 7919 + n);
      const double est = linear_estimate(4096, simulate_column(4096, n, rng));
      errors.push_back(std::abs(est - n) / n);
    }
    CHECK(median(errors) <= 0.10);
  }
}

TEST_CASE("shared bit probability") {
  const SketchConfig c = default_config();
  CHECK(shared_bit_prob(0.0, c) == 0.0);

  SketchConfig single = c;
  single.numRa = 1;
  single.numVa = 0;
  single.cbn = {12};
  const double cells = 4096.0 * 4096.0;
  // 1 - e^-1 = 0.632120558828557678...
  CHECK(shared_bit_prob(cells, single) == doctest::Approx(0.6321205588285577).epsilon(1e-14));

  double prev = -1;
  for (double eta = 0; eta <= 1e8; eta += 1e6) {
    const double e = shared_bit_prob(eta, c);
    CHECK(e >= prev);
    CHECK(e < 1.0);
    prev = e;
  }
}

TEST_CASE("corrected estimate") {
  for (std::uint32_t z = 1; z <= 4096; ++z) {
    const double lin = linear_estimate(4096, z);
    const double cor = corrected_estimate(z, 0.0, 4096);
    REQUIRE(std::memcmp(&lin, &cor, sizeof lin) == 0);
  }
  const double eps = 0.25;  // g(1-eps) = 3072 exactly
  CHECK(corrected_estimate(static_cast<std::uint32_t>(4096 * (1 - eps)), eps, 4096) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(corrected_estimate(4000, eps, 4096) == 0.0);  // above g(1-eps): clamped
  CHECK(corrected_estimate(0, eps, 4096) == kSaturated);

  double prev = kSaturated;
  for (std::uint32_t z = 1; z < 3000; ++z) {
    const double e = corrected_estimate(z, eps, 4096);
    REQUIRE(e < prev);
    prev = e;
  }
}

TEST_CASE("correction helps when columns are shared with other flows") {
  // One host of cardinality n sharing its four columns with eta background
  // flows spread over 16 columns x 1024 rows per array.
  SketchConfig c = testing::tiny_config();
  c.g = 1024;
  const std::uint32_t g = c.g;
  const std::uint32_t columns = 16;
  const std::uint32_t n = 500;
  const double eta = columns * g;  // each array bit set with probability 1 - 1/e
  const double eps = shared_bit_prob(eta, c);
  REQUIRE(eps > 0.1);

  std::vector<double> rawErr, corErr;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<bool>> hostColumn(4, std::vector<bool>(g));
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto row = rng() % g;
      for (auto& col : hostColumn) col[row] = true;
    }
    for (std::uint64_t f = 0; f < static_cast<std::uint64_t>(eta); ++f) {
      for (auto& col : hostColumn) {
        // Only flows landing in the host's column matter.
        if (rng() % columns == 0) col[rng() % g] = true;
      }
    }
    std::uint32_t z = 0;
    for (std::uint32_t row = 0; row < g; ++row)
      z += !(hostColumn[0][row] && hostColumn[1][row] && hostColumn[2][row] && hostColumn[3][row]);
    rawErr.push_back(std::abs(linear_estimate(g, z) - n));
    corErr.push_back(std::abs(corrected_estimate(z, eps, g) - n));
  }
  CHECK(median(corErr) < median(rawErr));
}

TEST_CASE("hot threshold") {
  CHECK(hot_threshold(1024, 0.0, 4096) == doctest::Approx(4096 * std::exp(-0.25)).epsilon(1e-15));
  // 4096 e^-0.25 = 3189.96800746047...
  CHECK(hot_threshold(1024, 0.0, 4096) == doctest::Approx(3189.968007460474).epsilon(1e-13));
  CHECK(hot_threshold(1024, 0.0, 4096, ThresholdFormula::Inverted) == hot_threshold(1024, 0.0, 4096));

  const double eps = 0.01;
  CHECK(hot_threshold(1024, eps, 4096) ==
        doctest::Approx(4096 * 1.01 * std::exp(-0.25) - 4096 * 0.01).epsilon(1e-12));
  CHECK(hot_threshold(1024, eps, 4096, ThresholdFormula::Inverted) ==
        doctest::Approx(4096 * 0.99 * std::exp(-0.25)).epsilon(1e-12));
  CHECK(hot_threshold(100000, 0.5, 4096) == 0.0);  // clamped

  // Inverting the corrected estimate at the threshold gives back theta.
  const double inv = hot_threshold(1024, 0.05, 4096, ThresholdFormula::Inverted);
  CHECK(-4096 * std::log(inv / (4096 * 0.95)) == doctest::Approx(1024).epsilon(1e-12));

  double prev = 4097;
  for (double theta = 1; theta < 20000; theta += 37) {
    const double t = hot_threshold(theta, 0.001, 4096);
    CHECK(t <= 4096);
    if (t > 0) CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("a lone host of cardinality 2 theta falls below the threshold") {
  const double thetaBn = hot_threshold(1024, 0.0, 4096);
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed + 1);
    pass += simulate_column(4096, 2048, rng) <= thetaBn;
  }
  CHECK(pass >= 990);
}

TEST_CASE("sketch load estimate") {
  const SketchConfig c = testing::small_config();  // RA(0) holds 4096 x 64 bits per sketch
  {
    CubeOfBitsArrays empty(c);
    const LoadEstimate load = estimate_cs_load(empty, 0);
    CHECK(load.eta == 0.0);
    CHECK(load.epsilon == 0.0);
  }

  const std::uint32_t flows = 4096 * 64 / 4;
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CubeOfBitsArrays cube(c);
    std::mt19937_64 rng(seed);
    std::set<std::uint64_t> seen;
    double prevEta = 0;
    while (seen.size() < flows) {
      const IpPair p{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng())};
      if (split_ip(mangle(p.iip, c), c).rp != 0) continue;
      if (!seen.insert((std::uint64_t{p.iip} << 32) | p.oip).second) continue;
      record_pair(cube, p);
      if (seed == 0 && seen.size() % 8192 == 0) {
        const double eta = estimate_cs_load(cube, 0).eta;
        CHECK(eta > prevEta);
        prevEta = eta;
      }
    }
    const LoadEstimate load = estimate_cs_load(cube, 0);
    errors.push_back(std::abs(load.eta - flows) / flows);
    CHECK(load.epsilon == doctest::Approx(shared_bit_prob(load.eta, c)));
    CHECK(estimate_cs_load(cube, 1).eta == 0.0);
  }
  CHECK(median(errors) <= 0.10);
}

TEST_CASE("saturated sketch caps epsilon") {
  SketchConfig c = testing::small_config();
  c.g = 8;
  c.cbn = {12, 12, 12, 12};
  CubeOfBitsArrays cube(c);
  for (std::uint32_t col = 0; col < 4096; ++col)
    for (std::uint32_t row = 0; row < 8; ++row) cube.set_bit(0, 0, col, row);
  const LoadEstimate load = estimate_cs_load(cube, 0);
  CHECK(load.eta == kSaturated);
  CHECK(load.epsilon == kMaxEpsilon);
}
