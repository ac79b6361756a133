#pragma once

/**
 * @file platoon_simulator.hpp
 * @brief Fixed-step time-domain simulation of a platoon with delayed V2V data.
 *
 * Vehicle 0 is the lead; its trajectory is generated in closed form from a
 * prescribed acceleration profile. Followers 1..N obey x' = v, v' = a,
 * tau a' = u - a with u from the single or multi-predecessor law. The coupled
 * delay system is integrated with classical RK4; delayed signals are read from
 * a history buffer at exact grid offsets (ell is a multiple of the step) and
 * by cubic Hermite interpolation at half-step stages.
 */

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "platoon/core_model.hpp"

namespace platoon {

/// Lead vehicle acceleration a0(t) together with its exact integrals.
struct LeadProfile {
  enum class Kind { PaperSine, Zero, CustomTable };

  Kind kind = Kind::Zero;
  double amplitude = 0.0;  ///< [m/s^2]
  double frequency = 0.0;  ///< [rad/s]
  double startTime = 0.0;  ///< [s]
  double endTime = 0.0;    ///< [s]; may be +inf for a persistent sine
  /// CustomTable: piecewise-linear acceleration through (times[k], accels[k]),
  /// zero outside [times.front(), times.back()].
  std::vector<double> times;
  std::vector<double> accels;

  /// amplitude sin(frequency (t - start)) on (start, end), zero elsewhere.
  static LeadProfile paper_sine(double amplitude = 0.5, double frequency = 0.1,
                                double startTime = 10.0, double endTime = -1.0);
  static LeadProfile zero() { return {}; }

  double acceleration(double t) const;
  /// Integral of acceleration from 0 to t (zero for t <= 0).
  double velocity_change(double t) const;
  /// Double integral of acceleration from 0 to t (zero for t <= 0).
  double position_change(double t) const;

  /// Time from which the disturbance acts (start of the table for CustomTable).
  double onset() const;
  void validate() const;
  bool operator==(const LeadProfile&) const = default;
};

struct VehicleConfig {
  ControllerGains gains;
  SpacingPolicy spacing;
  PlantParams plant;

  bool operator==(const VehicleConfig&) const = default;
};

struct Scenario {
  int nFollowers = 12;
  double cruiseSpeed = 25.0;
  std::vector<VehicleConfig> vehicles;  ///< followers 1..N at index 0..N-1
  LeadProfile lead;
  double duration = 150.0;
  double stepSize = 1e-3;
  double recordInterval = 1e-2;  ///< trace sampling; a multiple of stepSize
  double settleWindow = 0.0;     ///< raw sup norms ignore t < settleWindow

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

struct VehicleMetrics {
  double supAbsDelta = 0.0;           ///< sup |delta_i| over t >= settleWindow
  double baselineDelta = 0.0;         ///< delta_i at the disturbance onset
  double supAbsDeltaCorrected = 0.0;  ///< sup |delta_i - baseline| after onset
  /// supAbsDelta_i / supAbsDelta_{i-1} for i >= 2; norms below 1e-9 m count as zero.
  double ratio = 0.0;
  double ratioCorrected = 0.0;

  bool operator==(const VehicleMetrics&) const = default;
};

/// Sampled trajectories. Matrices have one row per recorded time and one
/// column per vehicle (column 0 is the lead). For the lead, u holds its
/// prescribed acceleration and delta is zero.
struct SimTrace {
  std::vector<double> times;
  Eigen::MatrixXd x, v, a, u, delta;
  std::vector<VehicleMetrics> metrics;  ///< index = vehicle, entry 0 unused
  double maxRatio = 0.0;                ///< max over i >= 2 of ratio
  double maxRatioCorrected = 0.0;
  double minFrontGap = 0.0;  ///< min over time and i of x_{i-1} - x_i
  double maxAbsDeltaAllTime = 0.0;

  int vehicle_count() const { return static_cast<int>(x.cols()); }
};

/// Read access to (possibly delayed) vehicle states.
class PlatoonHistory {
 public:
  virtual ~PlatoonHistory() = default;
  /// State of `vehicle` at time t; throws ConfigError when t is not covered.
  virtual VehicleState state(int vehicle, double t) const = 0;
};

/// Linear interpolation over a recorded trace. Queries outside the recorded
/// time span throw ConfigError (insufficient history).
class TraceHistory : public PlatoonHistory {
 public:
  explicit TraceHistory(const SimTrace& trace) : trace_(trace) {}
  VehicleState state(int vehicle, double t) const override;

 private:
  const SimTrace& trace_;
};

/// u_i = ka a_{i-1}(t - ell) - kv (v_i - v_{i-1}) - kp delta_i.
double control_input_cacc(const VehicleState& self, const VehicleState& predecessor,
                          const VehicleState& delayedPredecessor, const ControllerGains& g,
                          const SpacingPolicy& policy);

/// Multi-predecessor law. delayed[q-1] is the state of vehicle i - q at
/// t - ell (q = 1..r); the q = 1 term uses only its acceleration.
double control_input_cacc_plus(const VehicleState& self, const VehicleState& predecessor,
                               std::span<const VehicleState> delayed,
                               const ControllerGains& g, const SpacingPolicy& policy);

/// History-driven forms: query vehicle i, its predecessors and their delayed
/// states from `history` at time t.
double control_input_cacc(int i, const PlatoonHistory& history, const ControllerGains& g,
                          const SpacingPolicy& policy, double t);
double control_input_cacc_plus(int i, const PlatoonHistory& history,
                               const ControllerGains& g, const SpacingPolicy& policy,
                               double t);

/// Runs the scenario. Throws ConfigError for invalid scenarios and
/// BlowupError when any state exceeds 1e9 in magnitude.
SimTrace simulate(const Scenario& scenario);

enum class PaperVariant { CaccStable, CaccUnstable, CaccPlus1, CaccPlus2 };

PaperVariant parse_paper_variant(const std::string& name);
std::string to_string(PaperVariant variant);

/// Built-in platoon experiments (N = 12, 25 m/s, tau = tau0 = 0.5 s,
/// ell = 0.1 s, one-period sine pulse from the lead, 150 s at 1 ms).
Scenario build_paper_scenario(PaperVariant variant);

/// x_0(t) - x_N(t) at each recorded time.
Eigen::VectorXd platoon_length(const SimTrace& trace);

/// Half the peak-to-peak swing of delta_i over recorded times in [from, to].
double delta_amplitude(const SimTrace& trace, int vehicle, double from, double to);

}  // namespace platoon
