#pragma once

/**
 * @file frequency_analysis.hpp
 * @brief Spacing-error propagation transfer functions with communication
 * delay, their sup-norms over frequency and lag, and stability checks.
 *
 * Single predecessor:
 *   H1(s) = (ka s^2 e^{-ell s} + kv s + kp) / (tau s^3 + s^2 + gamma s + kp)
 * r predecessors, branch q:
 *   Hq(s) = Nq(s) / (tau s^3 + s^2 + gamma_r s + r kp)
 *   N1 = ka s^2 e^{-ell s} + kv s + kp,  Nq = e^{-ell s}(ka s^2 + kv s + kp)
 *
 * The delay is evaluated exactly on the imaginary axis (no rational
 * approximation).
 */

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "platoon/core_model.hpp"

namespace platoon {

struct FrequencyResponsePoint {
  double omega = 0.0;
  double magnitude = 0.0;
  double realPart = 0.0;
  double imagPart = 0.0;
};

/// N1(j omega) = j omega (ka omega sin(omega ell) + kv) + kp - ka omega^2 cos(omega ell)
template <typename Scalar>
std::complex<Scalar> single_predecessor_numerator(const BasicControllerGains<Scalar>& g,
                                                  Scalar omega) {
  using std::cos;
  using std::sin;
  const Scalar phase = omega * g.ell;
  return {g.kp - g.ka * omega * omega * cos(phase),
          omega * (g.ka * omega * sin(phase) + g.kv)};
}

/// tau (j omega)^3 + (j omega)^2 + c1 (j omega) + c0
template <typename Scalar>
std::complex<Scalar> lag_denominator(Scalar tau, Scalar c1, Scalar c0, Scalar omega) {
  return {c0 - omega * omega, omega * (c1 - tau * omega * omega)};
}

/// H1(j omega; tau). Throws NumericalError if the denominator vanishes.
FrequencyResponsePoint eval_H1(const ControllerGains& g, double tau, double omega);

/// Hq(j omega; tau) of an r-predecessor design, 1 <= q <= g.r.
FrequencyResponsePoint eval_Hq(const ControllerGains& g, int q, double tau, double omega);

/// Peak of a magnitude function over [0, omegaMax].
struct PeakEstimate {
  double omega = 0.0;
  double magnitude = 0.0;
  int gridPoints = 0;
};

/// Lower bound on sup |F(j omega)|: maximum over omega = 0 plus a
/// log-spaced grid on [1e-4, omegaMax], each interior grid maximum refined by
/// golden-section search until its bracket is narrower than refineTol.
/// Ties resolve toward the smaller omega.
PeakEstimate sup_norm_over_omega(const std::function<double(double)>& magnitude,
                                 double omegaMax, int gridPoints, double refineTol);

/// Options for the robust (over tau) sweeps.
struct SweepOptions {
  double omegaMax = 0.0;  ///< <= 0 selects default_omega_max()
  int gridPoints = 20000;
  double refineTol = 1e-8;
  int tauGridPoints = 50;
  double tolerance = 1e-9;  ///< allowed excess of the peak above 1
};

/// max(10 * 2 pi / ell, 100 / tau0, 1000); the first term is dropped when ell == 0.
double default_omega_max(double ell, double tau0);

/// `points` log-spaced lag values on [tau0 / 1000, tau0], with tau0 always last.
std::vector<double> tau_grid(double tau0, int points);

struct BranchPeak {
  int q = 1;
  double peak = 0.0;  ///< unscaled max over omega and tau of |Hq|
  double omega = 0.0;
  double tau = 0.0;

  bool operator==(const BranchPeak&) const = default;
};

struct StabilityReport {
  bool internallyStable = false;
  bool stringStable = false;
  double peakMagnitude = 0.0;  ///< max of |H1| (r == 1) or r |Hq| (r > 1)
  double peakOmega = 0.0;
  double worstTau = 0.0;
  double tolerance = 1e-9;
  std::vector<BranchPeak> perBranchPeaks;
  double sumOfNorms = 0.0;  ///< ||H1|| + (r - 1) ||H2||, diagnostic only
  int gridPoints = 0;
  int tauGridPoints = 0;
  double omegaMax = 0.0;

  bool robust() const { return internallyStable && stringStable; }
  bool operator==(const StabilityReport&) const = default;
};

/// Checks the string stability condition over a tau grid in (0, tau0].
/// r == 1: ||H1|| <= 1 + tolerance. r > 1: r |Hq| <= 1 + tolerance for
/// q = 1, 2 (all q >= 2 share one magnitude).
StabilityReport robust_string_stability(const ControllerGains& g, double tau0,
                                        const SweepOptions& options = {});

/// Routh condition on the cubic denominator at the worst lag tau0:
/// gamma > tau0 kp (r == 1) or gamma_r > tau0 r kp (r > 1).
bool internal_stability(const ControllerGains& g, double tau0);

/// Frequency and lag at which ka >= 1 provably breaks string stability.
struct InstabilityWitness {
  double omegaHat = 0.0;
  double tauWitness = 0.0;
  double magnitude = 0.0;
  long harmonicIndex = 0;  ///< omegaHat * ell = 2 pi k

  bool operator==(const InstabilityWitness&) const = default;
};

/// Builds a witness (omega, tau in (0, tau0]) with |H1| > 1 for ka >= 1.
/// Throws NotApplicableError for ka < 1 or ell == 0, ConfigError when the
/// design is not internally stable, SearchExhaustedError if ka == 1 finds no
/// harmonic up to maxHarmonic.
InstabilityWitness falsify_ka_ge_1(const ControllerGains& g, double tau0,
                                   long maxHarmonic = 1'000'000);

/// Closed-form sufficient conditions at tau = tau0 (sine/cosine bounds):
///   1 - 2 tau0 gamma - ka^2 - 2 ka kv ell - ka kp ell^2 >= 0
///   gamma^2 - (2 kp - 2 ka kp + kv^2) >= 0
/// For r > 1 they are applied to scaled_gains(g). True implies the sweep
/// verdict is stable; the converse does not hold.
bool conservative_margin_check(const ControllerGains& g, double tau0);

/// |Hq(j omega; tau)| sampled on a log grid plus omega = 0, for plotting.
std::vector<FrequencyResponsePoint> magnitude_curve(const ControllerGains& g, int q,
                                                    double tau, double omegaMax,
                                                    int points);

}  // namespace platoon
