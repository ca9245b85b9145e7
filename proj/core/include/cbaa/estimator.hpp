#pragma once

#include <cstdint>
#include <limits>

#include "cbaa/sketch.hpp"

namespace cbaa {

/// Returned by the estimators when a bit vector has no zero bits left.
inline constexpr double kSaturated = std::numeric_limits<double>::infinity();

/// Largest shared-bit probability handed out by estimate_cs_load.
inline constexpr double kMaxEpsilon = 1.0 - 1.0 / 1048576.0;

struct LoadEstimate {
  double eta = 0.0;      // flows projected into the sketch
  double epsilon = 0.0;  // probability a union-column bit is set by other hosts
};

enum class ThresholdFormula {
  Paper,     // g(1+e)exp(-theta/g) - g*e, the published form
  Inverted,  // g(1-e)exp(-theta/g), the exact inverse of corrected_estimate
};

/// Linear counting: -g ln(z/g). z == 0 yields kSaturated.
double linear_estimate(std::uint32_t g, std::uint32_t z);

/// Product over all arrays of (1 - exp(-eta / (c(i) g))).
double shared_bit_prob(double eta, const SketchConfig& config);

/// -g ln(Z / (g (1 - epsilon))), clamped at 0. Z == 0 yields kSaturated.
double corrected_estimate(std::uint32_t zeroCount, double epsilon, std::uint32_t g);

/// Zero-bit count at or below which a column counts as hot. Clamped at 0.
double hot_threshold(double theta, double epsilon, std::uint32_t g, ThresholdFormula formula = ThresholdFormula::Paper);

/// Flow load of one sketch from linear counting over all of restoring array 0.
/// Requires a quiescent cube.
LoadEstimate estimate_cs_load(const CubeOfBitsArrays& cube, std::uint32_t csIdx);

}  // namespace cbaa
