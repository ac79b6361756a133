#pragma once

/**
 * @file gain_synthesis.hpp
 * @brief Delay-dependent time headway bounds and (kv, kp) feasible regions.
 *
 * For ka in (0, 1) the admissible gains are S1 ∩ S2 with
 *   S1: kv / a1 + kp / b1 >= 1,   a1 = (1 - ka) / hw,   b1 = 2 (1 - ka) / hw^2
 *   S2: kv / a2 + kp / b2 <= 1,   a2 = (1 - ka^2) / (2 (tau0 + ka ell)),  b2 = a2 / hw
 * which is non-empty exactly when hw > 2 (tau0 + ka ell) / (1 + ka).
 *
 * r-predecessor designs are synthesized in the scaled variables
 * (r ka, r kv, r kp, (r + 1) / 2 hw) and converted back to per-vehicle gains.
 */

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "platoon/core_model.hpp"
#include "platoon/frequency_analysis.hpp"

namespace platoon {

/// max(2 (tau0 + ka ell) / (1 + ka), ell / 2). Requires ka in (0, 1).
double hw_lower_bound_cacc(double tau0, double ell, double ka);

/// 4 (tau0 + r ka ell) / ((r + 1)(1 + r ka)). Requires r ka in (0, 1).
double hw_lower_bound_cacc_plus(double tau0, double ell, double ka, int r);

struct FeasibleRegion {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  double vertexKv = 0.0;  ///< intersection of the two boundary lines
  double vertexKp = 0.0;
  bool nonEmpty = false;

  /// kv, kp > 0 and both half-plane inequalities hold (with slack `tol`).
  bool contains(double kv, double kp, double tol = 0.0) const;
  bool operator==(const FeasibleRegion&) const = default;
};

FeasibleRegion feasible_region(double ka, double hw, double tau0, double ell);

/// Closed interval [lower, upper]; empty when lower > upper.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool empty() const { return lower > upper; }
  bool contains(double x) const { return !empty() && x >= lower && x <= upper; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

/// kp values keeping (kv, kp) in the region:
/// [max(0, b1 (1 - kv / a1)), b2 (1 - kv / a2)].
Interval kp_range_given_kv(const FeasibleRegion& region, double kv);

/// Corners of S1 ∩ S2 (with kv, kp >= 0) in counter-clockwise order; the
/// first corner is repeated at the end so the result plots as a closed loop.
/// Empty for an empty region.
std::vector<Eigen::Vector2d> region_boundary(const FeasibleRegion& region);

struct SynthesisRequest {
  double tau0 = 0.5;
  double ell = 0.1;
  double ka = 0.5;
  int r = 1;
  double eta = 0.05;
  std::optional<double> kvChoice;  ///< per-vehicle kv; default picks inside the region
  std::optional<double> kpChoice;  ///< per-vehicle kp; must lie in the admissible range
  SweepOptions sweep;
};

struct SynthesisResult {
  double hwLowerBound = 0.0;  ///< per-vehicle headway bound (no eta factor)
  double hwChosen = 0.0;      ///< per-vehicle headway actually used
  ControllerGains gains;
  FeasibleRegion region;  ///< in scaled variables when gains.r > 1
  StabilityReport certification;
  double tau0 = 0.0;
  double eta = 0.0;
  bool delayFloorActive = false;  ///< the ell / 2 branch set the bound
  double strictnessMargin = 1e-6;

  bool operator==(const SynthesisResult&) const = default;
};

/// Bound, region, gain pick and frequency-domain certification. Throws
/// ConfigError on invalid inputs (including a choice outside the region) and
/// NumericalError if the certification sweep finds a violation.
SynthesisResult synthesize(const SynthesisRequest& request);

/// Executable form of the fact that synthesized designs are internally stable.
bool internal_stability_implied(const SynthesisResult& result);

}  // namespace platoon
