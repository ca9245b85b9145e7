#include "cbaa/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace cbaa {

double linear_estimate(std::uint32_t g, std::uint32_t z) {
  if (z == 0) return kSaturated;
  const double gd = static_cast<double>(g);
  return -gd * std::log(static_cast<double>(z) / gd);
}

double shared_bit_prob(double eta, const SketchConfig& config) {
  double eps = 1.0;
  const double g = static_cast<double>(config.g);
  for (unsigned i = 0; i < config.arrayCount(); ++i) {
    const double cells = static_cast<double>(config.columnCount(i)) * g;
    eps *= -std::expm1(-eta / cells);
  }
  return eps;
}

double corrected_estimate(std::uint32_t zeroCount, double epsilon, std::uint32_t g) {
  if (zeroCount == 0) return kSaturated;
  const double gd = static_cast<double>(g);
  const double est = -gd * std::log(static_cast<double>(zeroCount) / (gd * (1.0 - epsilon)));
  return std::max(est, 0.0);
}

double hot_threshold(double theta, double epsilon, std::uint32_t g, ThresholdFormula formula) {
  const double gd = static_cast<double>(g);
  const double decay = std::exp(-theta / gd);
  const double value = formula == ThresholdFormula::Paper ? gd * (1.0 + epsilon) * decay - gd * epsilon
                                                          : gd * (1.0 - epsilon) * decay;
  return std::max(value, 0.0);
}

LoadEstimate estimate_cs_load(const CubeOfBitsArrays& cube, std::uint32_t csIdx) {
  const SketchConfig& c = cube.config();
  const double cells = static_cast<double>(c.columnCount(0)) * c.g;
  const std::uint64_t zeros = cube.zero_count_array(csIdx, 0);
  LoadEstimate out;
  if (zeros == 0) {
    out.eta = kSaturated;
    out.epsilon = kMaxEpsilon;
    return out;
  }
  out.eta = -cells * std::log(static_cast<double>(zeros) / cells);
  out.epsilon = std::min(shared_bit_prob(out.eta, c), kMaxEpsilon);
  return out;
}

}  // namespace cbaa
