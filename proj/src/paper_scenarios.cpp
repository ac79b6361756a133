#include "platoon/platoon_simulator.hpp"

namespace platoon {
namespace {

constexpr double kTau0 = 0.5;
constexpr double kDelay = 0.1;

VehicleConfig vehicle(double ka, double kv, double kp, double hw, int r, double d) {
  return {ControllerGains{ka, kv, kp, hw, kDelay, r}, SpacingPolicy{d, hw},
          PlantParams{kTau0, kTau0}};
}

VehicleConfig single_predecessor(double hw) { return vehicle(0.5, 0.67, 0.014, hw, 1, 5.0); }

}  // namespace

PaperVariant parse_paper_variant(const std::string& name) {
  if (name == "cacc-stable") return PaperVariant::CaccStable;
  if (name == "cacc-unstable") return PaperVariant::CaccUnstable;
  if (name == "caccplus-1") return PaperVariant::CaccPlus1;
  if (name == "caccplus-2") return PaperVariant::CaccPlus2;
  throw ConfigError("unknown paper variant '" + name +
                    "' (expected cacc-stable, cacc-unstable, caccplus-1, caccplus-2)");
}

std::string to_string(PaperVariant variant) {
  switch (variant) {
    case PaperVariant::CaccStable: return "cacc-stable";
    case PaperVariant::CaccUnstable: return "cacc-unstable";
    case PaperVariant::CaccPlus1: return "caccplus-1";
    case PaperVariant::CaccPlus2: return "caccplus-2";
  }
  return "unknown";
}

Scenario build_paper_scenario(PaperVariant variant) {
  Scenario s;
  s.nFollowers = 12;
  s.cruiseSpeed = 25.0;
  s.lead = LeadProfile::paper_sine();
  s.duration = 150.0;
  s.stepSize = 1e-3;
  s.recordInterval = 1e-2;

  const VehicleConfig threePredecessors = vehicle(0.2, 0.16, 0.02, 0.4, 3, 2.5);
  for (int i = 1; i <= s.nFollowers; ++i) {
    switch (variant) {
      case PaperVariant::CaccStable:
        s.vehicles.push_back(single_predecessor(0.75));
        break;
      case PaperVariant::CaccUnstable:
        s.vehicles.push_back(single_predecessor(0.65));
        break;
      case PaperVariant::CaccPlus1:
        if (i == 1)
          s.vehicles.push_back(single_predecessor(0.75));
        else if (i == 2)
          s.vehicles.push_back(vehicle(0.2, 0.35, 0.03, 0.6, 2, 5.0));
        else
          s.vehicles.push_back(threePredecessors);
        break;
      case PaperVariant::CaccPlus2:
        s.vehicles.push_back(i <= 2 ? single_predecessor(0.75) : threePredecessors);
        break;
    }
  }
  return s;
}

}  // namespace platoon
