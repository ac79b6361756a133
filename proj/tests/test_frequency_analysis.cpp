#include <gtest/gtest.h>

#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "platoon/frequency_analysis.hpp"

using namespace platoon;
using cd = std::complex<double>;

namespace {

const ControllerGains kCacc{0.5, 0.67, 0.014, 0.75, 0.1, 1};
const ControllerGains kCaccPlus{0.2, 0.16, 0.02, 0.4, 0.1, 3};

// Direct rational-function evaluation in s, independent of the library's
// real/imaginary expansion.
cd direct_H(const ControllerGains& g, int q, double tau, double omega) {
  const cd s(0.0, omega);
  const double r = g.r;
  const cd den = tau * s * s * s + s * s + (r * g.kv + r * (r + 1) / 2 * g.hw * g.kp) * s + r * g.kp;
  const cd e = std::exp(-s * g.ell);
  const cd num = q == 1 ? g.ka * s * s * e + g.kv * s + g.kp : e * (g.ka * s * s + g.kv * s + g.kp);
  return num / den;
}

double dense_peak(const ControllerGains& g, int q, double tau) {
  double best = 0.0;
  for (int k = 0; k <= 400000; ++k) best = std::max(best, std::abs(direct_H(g, q, tau, 4.0 * k / 400000.0)));
  return best;
}

}  // namespace

TEST(EvalH1, MatchesDirectEvaluationOnRandomInputs) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int n = 0; n < 200; ++n) {
    const ControllerGains g{u(rng), u(rng), u(rng), u(rng), 0.1 * u(rng), 1};
    const double tau = 0.5 * u(rng), omega = 10.0 * u(rng);
    const auto p = eval_H1(g, tau, omega);
    const cd ref = direct_H(g, 1, tau, omega);
    EXPECT_NEAR(p.realPart, ref.real(), 1e-12 * (1 + std::abs(ref)));
    EXPECT_NEAR(p.imagPart, ref.imag(), 1e-12 * (1 + std::abs(ref)));
    EXPECT_NEAR(p.magnitude, std::abs(ref), 1e-12 * (1 + std::abs(ref)));
  }
}

TEST(EvalH1, FrozenValues) {
  // Reference values computed once with numpy.
  const auto p = eval_H1(kCacc, 0.5, 1.0);
  EXPECT_NEAR(p.realPart, 0.603794147537268, 1e-12);
  EXPECT_NEAR(p.imagPart, -0.6196063536439526, 1e-12);
  EXPECT_NEAR(eval_H1(kCacc, 0.5, 0.1).magnitude, 0.9997493013474115, 1e-12);
}

TEST(EvalH1, UnitGainAtZeroFrequency) {
  EXPECT_DOUBLE_EQ(eval_H1(kCacc, 0.2, 0.0).magnitude, 1.0);
  EXPECT_THROW(eval_H1(kCacc, 0.0, 1.0), ConfigError);
  EXPECT_THROW(eval_H1(kCacc, 0.5, -1.0), ConfigError);
}

TEST(EvalHq, FrozenValuesAndBranchStructure) {
  const ControllerGains g{0.2, 0.35, 0.03, 0.6, 0.1, 2};
  const auto h1 = eval_Hq(g, 1, 0.5, 1.0);
  const auto h2 = eval_Hq(g, 2, 0.5, 1.0);
  EXPECT_NEAR(h1.realPart, 0.2666681298890935, 1e-12);
  EXPECT_NEAR(h1.imagPart, -0.32152444503993177, 1e-12);
  EXPECT_NEAR(h2.realPart, 0.2309033375226751, 1e-12);
  EXPECT_NEAR(h2.imagPart, -0.32614222441118124, 1e-12);
  // All q >= 2 branches coincide.
  EXPECT_EQ(eval_Hq(kCaccPlus, 2, 0.3, 0.7).magnitude, eval_Hq(kCaccPlus, 3, 0.3, 0.7).magnitude);
  EXPECT_THROW(eval_Hq(kCaccPlus, 4, 0.3, 0.7), ConfigError);
  EXPECT_THROW(eval_Hq(kCaccPlus, 0, 0.3, 0.7), ConfigError);
}

TEST(EvalHq, ReducesToH1ForSinglePredecessor) {
  for (double w : {0.0, 0.01, 0.3, 2.0, 50.0})
    EXPECT_EQ(eval_Hq(kCacc, 1, 0.4, w).magnitude, eval_H1(kCacc, 0.4, w).magnitude);
}

TEST(SupNorm, ResonantSecondOrderPeak) {
  // |1 / (s^2 + 2 zeta s + 1)| peaks at sqrt(1 - 2 zeta^2) with 1 / (2 zeta sqrt(1 - zeta^2)).
  const double zeta = 0.1;
  const auto mag = [&](double w) { return 1.0 / std::abs(cd(1.0 - w * w, 2.0 * zeta * w)); };
  const auto peak = sup_norm_over_omega(mag, 100.0, 2000, 1e-10);
  EXPECT_NEAR(peak.omega, std::sqrt(1.0 - 2.0 * zeta * zeta), 1e-6);
  EXPECT_NEAR(peak.magnitude, 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta)), 1e-10);
  EXPECT_EQ(peak.gridPoints, 2000);
}

TEST(SupNorm, MonotoneFunctionPeaksAtDc) {
  const auto peak = sup_norm_over_omega([](double w) { return 1.0 / (1.0 + w); }, 10.0, 1000, 1e-8);
  EXPECT_EQ(peak.omega, 0.0);
  EXPECT_EQ(peak.magnitude, 1.0);
}

TEST(SupNorm, RejectsBadOptions) {
  const auto f = [](double) { return 1.0; };
  EXPECT_THROW(sup_norm_over_omega(f, 1e-5, 2000, 1e-8), ConfigError);
  EXPECT_THROW(sup_norm_over_omega(f, 10.0, 999, 1e-8), ConfigError);
  EXPECT_THROW(sup_norm_over_omega(f, 10.0, 2000, 0.0), ConfigError);
}

TEST(TauGrid, LogSpacedEndingAtTau0) {
  const auto taus = tau_grid(0.5, 50);
  ASSERT_EQ(taus.size(), 50u);
  EXPECT_DOUBLE_EQ(taus.front(), 0.0005);
  EXPECT_DOUBLE_EQ(taus.back(), 0.5);
  EXPECT_NEAR(taus[1] / taus[0], taus[49] / taus[48], 1e-12);
}

TEST(DefaultOmegaMax, CoversDelayHarmonics) {
  EXPECT_EQ(default_omega_max(0.1, 0.5), 1000.0);
  EXPECT_NEAR(default_omega_max(0.01, 0.5), 2000.0 * std::numbers::pi, 1e-9);
  EXPECT_EQ(default_omega_max(0.0, 0.5), 1000.0);
  EXPECT_EQ(default_omega_max(0.0, 0.01), 10000.0);
}

TEST(RobustStringStability, HeadwaySweepAgainstDenseOracle) {
  // Expected peaks at tau0 from an independent dense sweep.
  struct Case { double hw; bool stable; };
  for (const Case c : {Case{0.65, false}, Case{0.7333, false}, Case{0.75, true}}) {
    ControllerGains g = kCacc;
    g.hw = c.hw;
    const StabilityReport rep = robust_string_stability(g, 0.5);
    EXPECT_EQ(rep.stringStable, c.stable) << "hw = " << c.hw;
    EXPECT_TRUE(rep.internallyStable);
    const double oracle = dense_peak(g, 1, 0.5);
    EXPECT_GE(rep.peakMagnitude, oracle - 1e-9) << "hw = " << c.hw;
  }
  ControllerGains g = kCacc;
  g.hw = 0.65;
  const StabilityReport rep = robust_string_stability(g, 0.5);
  EXPECT_NEAR(rep.peakMagnitude, 1.0018204576936602, 1e-9);
  EXPECT_NEAR(rep.peakOmega, 0.0935, 2e-3);
  EXPECT_DOUBLE_EQ(rep.worstTau, 0.5);
}

TEST(RobustStringStability, PaperDesignPeaksAtDc) {
  const StabilityReport rep = robust_string_stability(kCacc, 0.5);
  EXPECT_TRUE(rep.robust());
  EXPECT_LE(rep.peakMagnitude, 1.0 + 1e-9);
  EXPECT_EQ(rep.perBranchPeaks.size(), 1u);
  EXPECT_EQ(rep.sumOfNorms, rep.perBranchPeaks[0].peak);
}

TEST(RobustStringStability, MultiPredecessorScaledCondition) {
  const StabilityReport rep = robust_string_stability(kCaccPlus, 0.5);
  EXPECT_TRUE(rep.robust());
  ASSERT_EQ(rep.perBranchPeaks.size(), 2u);
  for (const auto& b : rep.perBranchPeaks) {
    EXPECT_LE(3.0 * b.peak, 1.0 + 1e-9);
    EXPECT_GE(b.peak, dense_peak(kCaccPlus, b.q, b.tau) - 1e-9);
  }
  EXPECT_NEAR(rep.sumOfNorms, rep.perBranchPeaks[0].peak + 2.0 * rep.perBranchPeaks[1].peak, 1e-15);
}

TEST(RobustStringStability, AccReductionIsStable) {
  // kv, kp inside the region for ka = 0, ell = 0, hw = 1.01 * 2 tau0.
  const ControllerGains acc{0.0, 0.995, 0.0025, 1.01 * 2.0 * 0.5, 0.0, 1};
  EXPECT_TRUE(robust_string_stability(acc, 0.5).robust());
  ControllerGains tight = acc;
  tight.hw = 0.9;
  EXPECT_FALSE(robust_string_stability(tight, 0.5).stringStable);
}

TEST(InternalStability, AgreesWithCompanionEigenvalues) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int unstable = 0;
  for (int n = 0; n < 500; ++n) {
    const ControllerGains g{0.2, 0.01 + u(rng), 0.01 + 2 * u(rng), 0.05 + u(rng), 0.1, 1 + int(3 * u(rng))};
    const double tau0 = 0.05 + 1.5 * u(rng);
    // Roots of tau0 s^3 + s^2 + gamma_r s + r kp via the companion matrix.
    Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
    c.row(0) << -1.0 / tau0, -gamma_r(g) / tau0, -g.r * g.kp / tau0;
    c(1, 0) = c(2, 1) = 1.0;
    const bool hurwitz = (c.eigenvalues().real().array() < 0.0).all();
    unstable += !hurwitz;
    EXPECT_EQ(internal_stability(g, tau0), hurwitz);
  }
  EXPECT_GT(unstable, 10);
}

TEST(Falsifier, WitnessExceedsUnity) {
  const ControllerGains g{1.5, 0.5, 0.1, 1.0, 0.1, 1};
  const InstabilityWitness w = falsify_ka_ge_1(g, 0.5);
  EXPECT_EQ(w.harmonicIndex, 1);
  EXPECT_NEAR(w.omegaHat * g.ell, 2.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(w.tauWitness * w.omegaHat * w.omegaHat, gamma(g), 1e-12);
  EXPECT_GT(std::abs(direct_H(g, 1, w.tauWitness, w.omegaHat)), 1.0);
  EXPECT_NEAR(w.magnitude, std::abs(direct_H(g, 1, w.tauWitness, w.omegaHat)), 1e-12);
}

TEST(Falsifier, BoundaryFeedforward) {
  const ControllerGains g{1.0, 0.8, 0.2, 0.9, 0.2, 1};
  const InstabilityWitness w = falsify_ka_ge_1(g, 0.5);
  EXPECT_GT(std::abs(direct_H(g, 1, w.tauWitness, w.omegaHat)), 1.0);
  EXPECT_LE(w.tauWitness, 0.5);
}

TEST(Falsifier, Preconditions) {
  EXPECT_THROW(falsify_ka_ge_1({0.9, 0.5, 0.1, 1.0, 0.1, 1}, 0.5), NotApplicableError);
  EXPECT_THROW(falsify_ka_ge_1({1.5, 0.5, 0.1, 1.0, 0.0, 1}, 0.5), NotApplicableError);
  EXPECT_THROW(falsify_ka_ge_1({1.5, 0.5, 0.1, 1.0, 0.1, 2}, 0.5), ConfigError);
  // gamma = 0.01 + 0.1 * 1 < tau0 kp = 0.5
  EXPECT_THROW(falsify_ka_ge_1({1.5, 0.01, 1.0, 0.1, 0.1, 1}, 0.5), ConfigError);
}

TEST(Falsifier, HarmonicCapIsReported) {
  // With a tiny lag bound the ka = 1 interval needs k >= 2.
  const ControllerGains g{1.0, 0.5, 0.01, 1.0, 0.1, 1};
  EXPECT_THROW(falsify_ka_ge_1(g, 1e-6, 1), SearchExhaustedError);
  EXPECT_NO_THROW(falsify_ka_ge_1(g, 1e-6));
}

TEST(ConservativeCheck, ImpliesSweepVerdict) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SweepOptions quick;
  quick.gridPoints = 2000;
  quick.tauGridPoints = 10;
  int passed = 0;
  for (int n = 0; n < 200 && passed < 15; ++n) {
    const ControllerGains g{0.3 * u(rng), 0.3 + u(rng), 0.2 * u(rng) + 1e-3, 0.5 + 2 * u(rng), 0.1 * u(rng), 1};
    if (!conservative_margin_check(g, 0.3)) continue;
    ++passed;
    EXPECT_TRUE(robust_string_stability(g, 0.3, quick).robust());
  }
  EXPECT_GE(passed, 5);
}

TEST(MagnitudeCurve, StartsAtDcAndIsLogSpaced) {
  const auto curve = magnitude_curve(kCacc, 1, 0.5, 100.0, 500);
  ASSERT_EQ(curve.size(), 501u);
  EXPECT_EQ(curve[0].omega, 0.0);
  EXPECT_DOUBLE_EQ(curve[1].omega, 1e-4);
  EXPECT_DOUBLE_EQ(curve.back().omega, 100.0);
}
