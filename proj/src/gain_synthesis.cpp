#include "platoon/gain_synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace platoon {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

void require_unit_feedforward(double k, const char* what) {
  if (!(k > 0.0 && k < 1.0))
    throw ConfigError(std::string(what) +
                      " must lie in (0, 1); string stability is impossible otherwise");
}

// Single-predecessor bound in scaled variables and whether ell / 2 dominates.
std::pair<double, bool> scaled_bound(double tau0, double ell, double ka) {
  const double lagBranch = 2.0 * (tau0 + ka * ell) / (1.0 + ka);
  const double delayBranch = ell / 2.0;
  return {std::max(lagBranch, delayBranch), delayBranch > lagBranch};
}

}  // namespace

double hw_lower_bound_cacc(double tau0, double ell, double ka) {
  require_positive(tau0, "tau0");
  if (!(ell >= 0.0)) throw ConfigError("ell must be non-negative");
  require_unit_feedforward(ka, "ka");
  return scaled_bound(tau0, ell, ka).first;
}

double hw_lower_bound_cacc_plus(double tau0, double ell, double ka, int r) {
  require_positive(tau0, "tau0");
  if (!(ell >= 0.0)) throw ConfigError("ell must be non-negative");
  if (r < 1) throw ConfigError("r must be at least 1");
  const double rka = double(r) * ka;
  require_unit_feedforward(rka, "r ka");
  return 4.0 * (tau0 + rka * ell) / ((double(r) + 1.0) * (1.0 + rka));
}

bool FeasibleRegion::contains(double kv, double kp, double tol) const {
  return kv > 0.0 && kp > 0.0 && kv / a1 + kp / b1 >= 1.0 - tol &&
         kv / a2 + kp / b2 <= 1.0 + tol;
}

FeasibleRegion feasible_region(double ka, double hw, double tau0, double ell) {
  require_unit_feedforward(ka, "ka");
  require_positive(hw, "hw");
  require_positive(tau0, "tau0");
  if (!(ell >= 0.0)) throw ConfigError("ell must be non-negative");

  FeasibleRegion region;
  region.a1 = (1.0 - ka) / hw;
  region.b1 = 2.0 * (1.0 - ka) / (hw * hw);
  region.a2 = (1.0 - ka * ka) / (2.0 * (tau0 + ka * ell));
  region.b2 = region.a2 / hw;

  const double det = region.a2 * region.b1 - region.a1 * region.b2;
  if (det == 0.0) throw NumericalError("feasible region boundary lines are parallel");
  region.vertexKv = region.a1 * region.a2 * (region.b1 - region.b2) / det;
  region.vertexKp = region.b1 * region.b2 * (region.a2 - region.a1) / det;
  region.nonEmpty = region.a1 < region.a2;
  return region;
}

Interval kp_range_given_kv(const FeasibleRegion& region, double kv) {
  if (!region.nonEmpty) throw ConfigError("feasible region is empty");
  require_positive(kv, "kv");
  return {std::max(0.0, region.b1 * (1.0 - kv / region.a1)),
          region.b2 * (1.0 - kv / region.a2)};
}

std::vector<Eigen::Vector2d> region_boundary(const FeasibleRegion& region) {
  if (!region.nonEmpty) return {};
  // Candidate corners: pairwise intersections of the two boundary lines and
  // the coordinate axes, filtered by membership.
  const std::array<Eigen::Vector2d, 6> candidates = {
      Eigen::Vector2d(region.a1, 0.0),
      Eigen::Vector2d(region.a2, 0.0),
      Eigen::Vector2d(0.0, region.b1),
      Eigen::Vector2d(0.0, region.b2),
      Eigen::Vector2d(region.vertexKv, region.vertexKp),
      Eigen::Vector2d(0.0, 0.0)};
  const double tol = 1e-12;
  std::vector<Eigen::Vector2d> corners;
  for (const auto& c : candidates) {
    const bool inside = c.x() >= -tol && c.y() >= -tol &&
                        c.x() / region.a1 + c.y() / region.b1 >= 1.0 - tol &&
                        c.x() / region.a2 + c.y() / region.b2 <= 1.0 + tol;
    const bool duplicate = std::any_of(corners.begin(), corners.end(), [&](const auto& p) {
      return (p - c).norm() < 1e-12;
    });
    if (inside && !duplicate) corners.push_back(c);
  }
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& c : corners) centroid += c;
  centroid /= double(corners.size());
  std::sort(corners.begin(), corners.end(), [&](const auto& p, const auto& q) {
    return std::atan2(p.y() - centroid.y(), p.x() - centroid.x()) <
           std::atan2(q.y() - centroid.y(), q.x() - centroid.x());
  });
  corners.push_back(corners.front());
  return corners;
}

SynthesisResult synthesize(const SynthesisRequest& request) {
  require_positive(request.tau0, "tau0");
  require_positive(request.eta, "eta");
  if (!(request.ell >= 0.0)) throw ConfigError("ell must be non-negative");
  if (request.r < 1) throw ConfigError("r must be at least 1");

  const double r = double(request.r);
  const double scaledKa = r * request.ka;
  require_unit_feedforward(scaledKa, request.r == 1 ? "ka" : "r ka");
  const double toPerVehicleHw = 2.0 / (r + 1.0);

  SynthesisResult result;
  result.eta = request.eta;
  result.tau0 = request.tau0;

  const auto [scaledBound, floorActive] = scaled_bound(request.tau0, request.ell, scaledKa);
  const double scaledHw = scaledBound * (1.0 + request.eta);
  result.delayFloorActive = floorActive;
  result.hwLowerBound = toPerVehicleHw * scaledBound;
  result.hwChosen = toPerVehicleHw * scaledHw;
  if (result.hwChosen - result.hwLowerBound < result.strictnessMargin)
    throw ConfigError("eta too small: chosen headway must exceed the bound by at least 1e-6 s");

  result.region = feasible_region(scaledKa, scaledHw, request.tau0, request.ell);
  if (!result.region.nonEmpty) throw NumericalError("feasible region is empty");

  const FeasibleRegion& region = result.region;
  const double scaledKv =
      request.kvChoice ? r * *request.kvChoice : region.a1 + 0.9 * (region.a2 - region.a1);
  const Interval kpRange = kp_range_given_kv(region, scaledKv);
  if (kpRange.empty() || !(kpRange.upper > 0.0))
    throw ConfigError("kv choice leaves no admissible kp (kv must stay below a2)");
  double scaledKp = kpRange.midpoint();
  if (request.kpChoice) {
    scaledKp = r * *request.kpChoice;
    if (!(scaledKp > 0.0) || !kpRange.contains(scaledKp))
      throw ConfigError("kp choice lies outside the admissible range [" +
                        std::to_string(kpRange.lower / r) + ", " +
                        std::to_string(kpRange.upper / r) + "]");
  }

  result.gains = {request.ka,       scaledKv / r,  scaledKp / r,
                  result.hwChosen,  request.ell,   request.r};

  result.certification = robust_string_stability(result.gains, request.tau0, request.sweep);
  if (!result.certification.robust())
    throw NumericalError("certification failed: peak " +
                         std::to_string(result.certification.peakMagnitude) + " at omega " +
                         std::to_string(result.certification.peakOmega) + ", tau " +
                         std::to_string(result.certification.worstTau) +
                         (result.certification.internallyStable ? "" : " (internally unstable)"));
  return result;
}

bool internal_stability_implied(const SynthesisResult& result) {
  return internal_stability(result.gains, result.tau0);
}

}  // namespace platoon
