#pragma once

/**
 * @file core_model.hpp
 * @brief Shared domain types for constant-time-headway platoon control.
 *
 * Vehicles follow the longitudinal model x'' = a, tau a' + a = u with an
 * uncertain parasitic lag tau in (0, tau0]. Spacing is regulated through the
 * velocity-dependent error delta_i = x_i - x_{i-1} + d + hw v_i.
 *
 * All quantities are SI (seconds, meters). Types are plain value objects
 * templated on the scalar so the same formulas serve double and
 * higher-precision checks.
 */

#include <cmath>
#include <string>

#include "platoon/errors.hpp"

namespace platoon {

template <typename Scalar>
struct BasicPlantParams {
  Scalar tau{};   ///< actual parasitic actuation lag [s]
  Scalar tau0{};  ///< upper bound of the lag interval [s]

  bool valid() const { return tau0 > Scalar(0) && tau > Scalar(0) && tau <= tau0; }
  bool operator==(const BasicPlantParams&) const = default;
};

/// Gains of one vehicle's constant-time-headway law. r == 1 is plain CACC;
/// r > 1 adds delayed information from r - 1 further predecessors.
template <typename Scalar>
struct BasicControllerGains {
  Scalar ka{};   ///< predecessor acceleration feedforward [-]
  Scalar kv{};   ///< relative velocity gain [1/s]
  Scalar kp{};   ///< spacing error gain [1/s^2]
  Scalar hw{};   ///< time headway [s]
  Scalar ell{};  ///< communication delay [s]
  int r = 1;     ///< number of predecessors used

  bool operator==(const BasicControllerGains&) const = default;
};

template <typename Scalar>
struct BasicSpacingPolicy {
  Scalar d{};   ///< standstill distance [m]
  Scalar hw{};  ///< time headway [s]

  bool operator==(const BasicSpacingPolicy&) const = default;
};

template <typename Scalar>
struct BasicVehicleState {
  Scalar x{};  ///< position [m]
  Scalar v{};  ///< velocity [m/s]
  Scalar a{};  ///< acceleration [m/s^2]
};

using PlantParams = BasicPlantParams<double>;
using ControllerGains = BasicControllerGains<double>;
using SpacingPolicy = BasicSpacingPolicy<double>;
using VehicleState = BasicVehicleState<double>;

/// kv + hw kp, the coefficient of s in the single-predecessor denominator.
template <typename Scalar>
Scalar gamma(const BasicControllerGains<Scalar>& g) {
  return g.kv + g.hw * g.kp;
}

/// r kv + r(r+1)/2 hw kp, the coefficient of s in the r-predecessor
/// denominator. Reduces to gamma() at r == 1.
template <typename Scalar>
Scalar gamma_r(const BasicControllerGains<Scalar>& g) {
  if (g.r == 1) return gamma(g);
  const Scalar r = Scalar(g.r);
  return r * g.kv + r * (r + Scalar(1)) / Scalar(2) * g.hw * g.kp;
}

/// Gap at which the spacing error vanishes: d + hw v.
template <typename Scalar>
Scalar steady_spacing(const BasicSpacingPolicy<Scalar>& policy, Scalar v) {
  return policy.d + policy.hw * v;
}

/// Equivalent single-predecessor gains (r ka, r kv, r kp, (r+1)/2 hw).
/// The q = 1 branch of an r-predecessor design scaled by r has exactly the
/// single-predecessor structure in these variables. Identity at r == 1.
template <typename Scalar>
BasicControllerGains<Scalar> scaled_gains(const BasicControllerGains<Scalar>& g) {
  if (g.r == 1) return g;
  const Scalar r = Scalar(g.r);
  BasicControllerGains<Scalar> s = g;
  s.ka = r * g.ka;
  s.kv = r * g.kv;
  s.kp = r * g.kp;
  s.hw = (r + Scalar(1)) / Scalar(2) * g.hw;
  s.r = 1;
  return s;
}

/// Throws ConfigError unless kv, kp, hw > 0, ell >= 0, r >= 1 and all finite.
template <typename Scalar>
void validate(const BasicControllerGains<Scalar>& g) {
  using std::isfinite;
  if (!(isfinite(g.ka) && isfinite(g.kv) && isfinite(g.kp) && isfinite(g.hw) &&
        isfinite(g.ell)))
    throw ConfigError("controller gains must be finite");
  if (!(g.kv > Scalar(0))) throw ConfigError("kv must be positive");
  if (!(g.kp > Scalar(0))) throw ConfigError("kp must be positive");
  if (!(g.hw > Scalar(0))) throw ConfigError("hw must be positive");
  if (!(g.ell >= Scalar(0))) throw ConfigError("ell must be non-negative");
  if (g.r < 1) throw ConfigError("r must be at least 1");
}

/// True when ka (r = 1) or r ka (r > 1) lies in (0, 1), the range in which a
/// robustly string stable design can exist.
template <typename Scalar>
bool feedforward_in_certifiable_range(const BasicControllerGains<Scalar>& g) {
  const Scalar k = Scalar(g.r) * g.ka;
  return k > Scalar(0) && k < Scalar(1);
}

}  // namespace platoon
