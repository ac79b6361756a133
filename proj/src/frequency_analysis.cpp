#include "platoon/frequency_analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace platoon {
namespace {

constexpr double kLowestGridOmega = 1e-4;

FrequencyResponsePoint make_point(double omega, std::complex<double> h) {
  return {omega, std::abs(h), h.real(), h.imag()};
}

std::complex<double> branch_numerator(const ControllerGains& g, int q, double omega) {
  if (q == 1) return single_predecessor_numerator(g, omega);
  const std::complex<double> undelayed{g.kp - g.ka * omega * omega, g.kv * omega};
  return std::polar(1.0, -omega * g.ell) * undelayed;
}

std::complex<double> branch_denominator(const ControllerGains& g, double tau, double omega) {
  return lag_denominator(tau, gamma_r(g), double(g.r) * g.kp, omega);
}

// |Hq| without the degenerate-input check; a vanishing denominator maps to +inf.
double branch_magnitude(const ControllerGains& g, int q, double tau, double omega) {
  const auto den = branch_denominator(g, tau, omega);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(branch_numerator(g, q, omega) / den);
}

Eigen::ArrayXd log_grid(double lo, double hi, int points) {
  Eigen::ArrayXd grid =
      Eigen::ArrayXd::LinSpaced(points, std::log(lo), std::log(hi)).exp();
  grid(0) = lo;
  grid(points - 1) = hi;
  return grid;
}

// Golden-section maximization on [lo, hi]; returns (argmax, max).
std::pair<double, double> golden_maximize(const std::function<double(double)>& f,
                                          double lo, double hi, double tol) {
  const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invPhi * (hi - lo);
  double d = lo + invPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 200 && (hi - lo) > tol; ++iter) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

void check_response_inputs(double tau, double omega) {
  if (!(omega >= 0.0)) throw ConfigError("omega must be non-negative");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
}

}  // namespace

FrequencyResponsePoint eval_H1(const ControllerGains& g, double tau, double omega) {
  check_response_inputs(tau, omega);
  const auto den = lag_denominator(tau, gamma(g), g.kp, omega);
  if (den == 0.0)
    throw NumericalError("H1 denominator vanishes at omega = " + std::to_string(omega));
  return make_point(omega, single_predecessor_numerator(g, omega) / den);
}

FrequencyResponsePoint eval_Hq(const ControllerGains& g, int q, double tau, double omega) {
  check_response_inputs(tau, omega);
  if (q < 1 || q > g.r) throw ConfigError("branch index q must lie in [1, r]");
  const auto den = branch_denominator(g, tau, omega);
  if (den == 0.0)
    throw NumericalError("Hq denominator vanishes at omega = " + std::to_string(omega));
  return make_point(omega, branch_numerator(g, q, omega) / den);
}

PeakEstimate sup_norm_over_omega(const std::function<double(double)>& magnitude,
                                 double omegaMax, int gridPoints, double refineTol) {
  if (!(omegaMax > kLowestGridOmega))
    throw ConfigError("omegaMax must exceed the lowest grid frequency 1e-4");
  if (gridPoints < 1000) throw ConfigError("frequency grid needs at least 1000 points");
  if (!(refineTol > 0.0)) throw ConfigError("refineTol must be positive");

  const int n = gridPoints + 1;
  Eigen::ArrayXd omega(n);
  omega(0) = 0.0;
  omega.tail(gridPoints) = log_grid(kLowestGridOmega, omegaMax, gridPoints);
  Eigen::ArrayXd values(n);
  for (int i = 0; i < n; ++i) values(i) = magnitude(omega(i));

  PeakEstimate best{0.0, values(0), gridPoints};
  auto consider = [&best](double w, double m) {
    if (m > best.magnitude || (m == best.magnitude && w < best.omega)) {
      best.omega = w;
      best.magnitude = m;
    }
  };
  for (int i = 1; i < n; ++i) consider(omega(i), values(i));

  for (int i = 1; i + 1 < n; ++i) {
    if (!(values(i) > values(i - 1) && values(i) >= values(i + 1))) continue;
    const auto [w, m] = golden_maximize(magnitude, omega(i - 1), omega(i + 1), refineTol);
    consider(w, m);
  }
  return best;
}

double default_omega_max(double ell, double tau0) {
  double omegaMax = std::max(100.0 / tau0, 1000.0);
  if (ell > 0.0) omegaMax = std::max(omegaMax, 10.0 * 2.0 * std::numbers::pi / ell);
  return omegaMax;
}

std::vector<double> tau_grid(double tau0, int points) {
  if (!(tau0 > 0.0)) throw ConfigError("tau0 must be positive");
  if (points < 2) throw ConfigError("tau grid needs at least two points");
  const Eigen::ArrayXd grid = log_grid(tau0 / 1000.0, tau0, points);
  return {grid.data(), grid.data() + grid.size()};
}

StabilityReport robust_string_stability(const ControllerGains& g, double tau0,
                                        const SweepOptions& options) {
  validate(g);
  if (options.tauGridPoints < 10) throw ConfigError("tau grid needs at least 10 points");

  StabilityReport report;
  report.tolerance = options.tolerance;
  report.gridPoints = options.gridPoints;
  report.tauGridPoints = options.tauGridPoints;
  report.omegaMax =
      options.omegaMax > 0.0 ? options.omegaMax : default_omega_max(g.ell, tau0);
  report.internallyStable = internal_stability(g, tau0);

  const std::vector<double> taus = tau_grid(tau0, options.tauGridPoints);
  const int branches = g.r == 1 ? 1 : 2;
  const double scale = double(g.r);

  for (int q = 1; q <= branches; ++q) {
    BranchPeak branch{q, -1.0, 0.0, taus.front()};
    for (double tau : taus) {
      const auto peak = sup_norm_over_omega(
          [&](double w) { return branch_magnitude(g, q, tau, w); }, report.omegaMax,
          options.gridPoints, options.refineTol);
      if (peak.magnitude > branch.peak) branch = {q, peak.magnitude, peak.omega, tau};
    }
    report.perBranchPeaks.push_back(branch);
    if (scale * branch.peak > report.peakMagnitude) {
      report.peakMagnitude = scale * branch.peak;
      report.peakOmega = branch.omega;
      report.worstTau = branch.tau;
    }
  }

  report.sumOfNorms = report.perBranchPeaks[0].peak;
  if (g.r > 1) report.sumOfNorms += double(g.r - 1) * report.perBranchPeaks[1].peak;
  report.stringStable = report.peakMagnitude <= 1.0 + options.tolerance;
  return report;
}

bool internal_stability(const ControllerGains& g, double tau0) {
  return gamma_r(g) > tau0 * double(g.r) * g.kp;
}

InstabilityWitness falsify_ka_ge_1(const ControllerGains& g, double tau0, long maxHarmonic) {
  validate(g);
  if (g.r != 1) throw ConfigError("the ka >= 1 construction applies to r = 1");
  if (g.ka < 1.0) throw NotApplicableError("falsifier requires ka >= 1");
  if (g.ell <= 0.0) throw NotApplicableError("falsifier construction requires ell > 0");
  if (!(tau0 > 0.0)) throw ConfigError("tau0 must be positive");
  if (!internal_stability(g, tau0))
    throw ConfigError("falsifier requires an internally stable design (gamma > tau0 kp)");

  const double fourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
  const double ellSq = g.ell * g.ell;
  const double gam = gamma(g);

  InstabilityWitness witness;
  if (g.ka > 1.0) {
    // Smallest k with k^2 > gamma ell^2 / (4 pi^2 tau0); then tau omega^2 = gamma.
    const double threshold = gam * ellSq / (fourPiSq * tau0);
    long k = static_cast<long>(std::floor(std::sqrt(threshold))) + 1;
    while (double(k) * double(k) <= threshold) ++k;
    if (k > maxHarmonic)
      throw SearchExhaustedError("harmonic index " + std::to_string(k) +
                                 " exceeds cap " + std::to_string(maxHarmonic));
    witness.harmonicIndex = k;
    witness.omegaHat = 2.0 * double(k) * std::numbers::pi / g.ell;
    witness.tauWitness = gam / (witness.omegaHat * witness.omegaHat);
  } else {
    // Need kp hw ell^2/(4 pi^2) < tau k^2 < (kp hw + 2 kv) ell^2/(4 pi^2).
    const double lo = g.kp * g.hw * ellSq / fourPiSq;
    const double hi = (g.kp * g.hw + 2.0 * g.kv) * ellSq / fourPiSq;
    long k = static_cast<long>(std::floor(std::sqrt(lo / tau0))) + 1;
    double tau = tau0;
    if (!(double(k) * double(k) * tau0 < hi)) {
      // No square fits at tau0; scale tau so tau k^2 hits the interval midpoint.
      const double mid = 0.5 * (lo + hi);
      k = std::max(1L, static_cast<long>(std::ceil(std::sqrt(mid / tau0))));
      while (mid / (double(k) * double(k)) > tau0) ++k;
      tau = mid / (double(k) * double(k));
    }
    if (k > maxHarmonic)
      throw SearchExhaustedError(
          "no harmonic k <= " + std::to_string(maxHarmonic) +
          " satisfies the ka = 1 interval condition; interval for tau k^2 is (" +
          std::to_string(lo) + ", " + std::to_string(hi) + ")");
    witness.harmonicIndex = k;
    witness.omegaHat = 2.0 * double(k) * std::numbers::pi / g.ell;
    witness.tauWitness = tau;
  }

  witness.magnitude = eval_H1(g, witness.tauWitness, witness.omegaHat).magnitude;
  if (!(witness.magnitude > 1.0))
    throw NumericalError("constructed witness does not exceed unit magnitude");
  return witness;
}

bool conservative_margin_check(const ControllerGains& g, double tau0) {
  const ControllerGains s = scaled_gains(g);
  const double gam = gamma(s);
  const double lowFrequency =
      1.0 - 2.0 * tau0 * gam - s.ka * s.ka - 2.0 * s.ka * s.kv * s.ell -
      s.ka * s.kp * s.ell * s.ell;
  const double dcCurvature = gam * gam - (2.0 * s.kp - 2.0 * s.ka * s.kp + s.kv * s.kv);
  return lowFrequency >= 0.0 && dcCurvature >= 0.0;
}

std::vector<FrequencyResponsePoint> magnitude_curve(const ControllerGains& g, int q,
                                                    double tau, double omegaMax,
                                                    int points) {
  if (points < 2) throw ConfigError("magnitude curve needs at least two points");
  if (!(omegaMax > kLowestGridOmega))
    throw ConfigError("omegaMax must exceed the lowest grid frequency 1e-4");
  std::vector<FrequencyResponsePoint> curve;
  curve.reserve(points + 1);
  curve.push_back(eval_Hq(g, q, tau, 0.0));
  const Eigen::ArrayXd grid = log_grid(kLowestGridOmega, omegaMax, points);
  for (double w : grid) curve.push_back(eval_Hq(g, q, tau, w));
  return curve;
}

}  // namespace platoon
