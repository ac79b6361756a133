#include "platoon/platoon_simulator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace platoon {
namespace {

constexpr double kBlowupThreshold = 1e9;
// Sup norms below this are round-off; ratios treat them as zero.
constexpr double kNormFloor = 1e-9;

// Rows are vehicles; columns are (x, v, a).
using StateBlock = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

long steps_for(double span, double step) { return std::lround(span / step); }

bool is_multiple(double span, double step) {
  const double ratio = span / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

double spacing_error(const VehicleState& self, const VehicleState& predecessor,
                     const SpacingPolicy& policy) {
  return self.x - predecessor.x + policy.d + policy.hw * self.v;
}

VehicleState row_state(const StateBlock& block, int row) {
  return {block(row, 0), block(row, 1), block(row, 2)};
}

class Integrator {
 public:
  explicit Integrator(const Scenario& s)
      : s_(s),
        vehicles_(s.nFollowers + 1),
        h_(s.stepSize),
        delaySteps_(s.nFollowers + 1, 0),
        initialX_(s.nFollowers + 1) {
    long maxDelay = 0;
    for (int i = 1; i < vehicles_; ++i) {
      delaySteps_[i] = steps_for(config(i).gains.ell, h_);
      maxDelay = std::max(maxDelay, delaySteps_[i]);
    }
    capacity_ = maxDelay + 2;
    histY_.assign(capacity_, StateBlock::Zero(vehicles_, 3));
    histK_.assign(capacity_, StateBlock::Zero(vehicles_, 3));
    initialX_(0) = 0.0;
    for (int i = 1; i < vehicles_; ++i)
      initialX_(i) = initialX_(i - 1) - steady_spacing(config(i).spacing, s.cruiseSpeed);
    delayed_.resize(vehicles_);
  }

  SimTrace run();

 private:
  const VehicleConfig& config(int i) const { return s_.vehicles[i - 1]; }

  VehicleState lead(double t) const {
    return {s_.cruiseSpeed * t + s_.lead.position_change(t),
            s_.cruiseSpeed + s_.lead.velocity_change(t), s_.lead.acceleration(t)};
  }

  // Steady cruise before t = 0.
  VehicleState pre_start(int j, double t) const {
    if (j == 0) return lead(t);
    return {initialX_(j) + s_.cruiseSpeed * t, s_.cruiseSpeed, 0.0};
  }

  // State of vehicle j at half-step position `halfSteps` (time halfSteps * h / 2).
  VehicleState from_history(int j, long halfSteps) const {
    const double t = 0.5 * double(halfSteps) * h_;
    if (j == 0) return lead(t);
    if (halfSteps < 0) return pre_start(j, t);
    const long k = halfSteps / 2;
    const auto& y0 = histY_[k % capacity_];
    if (halfSteps % 2 == 0) return row_state(y0, j);
    // Cubic Hermite midpoint: (p0 + p1) / 2 + h (m0 - m1) / 8.
    const auto& y1 = histY_[(k + 1) % capacity_];
    const auto& k0 = histK_[k % capacity_];
    const auto& k1 = histK_[(k + 1) % capacity_];
    const Eigen::RowVector3d mid =
        0.5 * (y0.row(j) + y1.row(j)) + 0.125 * h_ * (k0.row(j) - k1.row(j));
    return {mid(0), mid(1), mid(2)};
  }

  // Derivatives at time (n + stage / 2) h; stage in {0, 1, 2}.
  void derivative(long n, int stage, const StateBlock& y, StateBlock& dy,
                  Eigen::VectorXd& u) {
    const double t = (double(n) + 0.5 * stage) * h_;
    const VehicleState leadNow = lead(t);
    dy.row(0) << leadNow.v, leadNow.a, 0.0;
    u(0) = leadNow.a;
    for (int i = 1; i < vehicles_; ++i) {
      const VehicleConfig& c = config(i);
      const VehicleState self = row_state(y, i);
      const VehicleState predecessor = i == 1 ? leadNow : row_state(y, i - 1);
      const long m = delaySteps_[i];
      for (int q = 1; q <= c.gains.r; ++q) {
        const int j = i - q;
        if (m == 0)
          delayed_[q - 1] = j == 0 ? leadNow : row_state(y, j);
        else
          delayed_[q - 1] = from_history(j, 2 * (n - m) + stage);
      }
      const double ui =
          c.gains.r == 1
              ? control_input_cacc(self, predecessor, delayed_[0], c.gains, c.spacing)
              : control_input_cacc_plus(
                    self, predecessor,
                    std::span<const VehicleState>(delayed_.data(), c.gains.r), c.gains,
                    c.spacing);
      u(i) = ui;
      dy.row(i) << self.v, self.a, (ui - self.a) / c.plant.tau;
    }
  }

  void store(long n, const StateBlock& y, const StateBlock& dy) {
    histY_[n % capacity_] = y;
    histK_[n % capacity_] = dy;
  }

  void set_lead_row(StateBlock& y, double t) const {
    const VehicleState l = lead(t);
    y.row(0) << l.x, l.v, l.a;
  }

  const Scenario& s_;
  int vehicles_;
  double h_;
  std::vector<long> delaySteps_;
  long capacity_ = 0;
  std::vector<StateBlock> histY_;
  std::vector<StateBlock> histK_;
  Eigen::VectorXd initialX_;
  std::vector<VehicleState> delayed_;
};

SimTrace Integrator::run() {
  const long steps = steps_for(s_.duration, h_);
  const long stride = steps_for(s_.recordInterval, h_);
  const long samples = steps / stride + 1;
  const double onset = s_.lead.onset();

  SimTrace trace;
  trace.times.reserve(samples);
  for (auto* m : {&trace.x, &trace.v, &trace.a, &trace.u, &trace.delta})
    m->setZero(samples, vehicles_);
  trace.metrics.assign(vehicles_, VehicleMetrics{});
  trace.minFrontGap = std::numeric_limits<double>::infinity();
  std::vector<bool> haveBaseline(vehicles_, false);

  StateBlock y(vehicles_, 3);
  for (int i = 0; i < vehicles_; ++i) y.row(i) << initialX_(i), s_.cruiseSpeed, 0.0;
  set_lead_row(y, 0.0);

  StateBlock k1(vehicles_, 3), k2(vehicles_, 3), k3(vehicles_, 3), k4(vehicles_, 3);
  StateBlock stage(vehicles_, 3);
  Eigen::VectorXd u(vehicles_), scratch(vehicles_);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(vehicles_);

  long row = 0;
  for (long n = 0;; ++n) {
    const double t = double(n) * h_;
    derivative(n, 0, y, k1, u);
    store(n, y, k1);

    for (int i = 1; i < vehicles_; ++i) {
      delta(i) = spacing_error(row_state(y, i), row_state(y, i - 1), config(i).spacing);
      trace.minFrontGap = std::min(trace.minFrontGap, y(i - 1, 0) - y(i, 0));
      auto& metric = trace.metrics[i];
      trace.maxAbsDeltaAllTime = std::max(trace.maxAbsDeltaAllTime, std::abs(delta(i)));
      if (t >= s_.settleWindow - 1e-12)
        metric.supAbsDelta = std::max(metric.supAbsDelta, std::abs(delta(i)));
      if (t >= onset - 1e-12) {
        if (!haveBaseline[i]) {
          metric.baselineDelta = delta(i);
          haveBaseline[i] = true;
        }
        metric.supAbsDeltaCorrected =
            std::max(metric.supAbsDeltaCorrected, std::abs(delta(i) - metric.baselineDelta));
      }
    }
    if (n % stride == 0 && row < samples) {
      trace.times.push_back(t);
      trace.x.row(row) = y.col(0).transpose();
      trace.v.row(row) = y.col(1).transpose();
      trace.a.row(row) = y.col(2).transpose();
      trace.u.row(row) = u.transpose();
      trace.delta.row(row) = delta.transpose();
      ++row;
    }
    if (n == steps) break;

    stage = y + 0.5 * h_ * k1;
    set_lead_row(stage, t + 0.5 * h_);
    derivative(n, 1, stage, k2, scratch);
    stage = y + 0.5 * h_ * k2;
    set_lead_row(stage, t + 0.5 * h_);
    derivative(n, 1, stage, k3, scratch);
    stage = y + h_ * k3;
    set_lead_row(stage, t + h_);
    derivative(n, 2, stage, k4, scratch);
    y += (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    set_lead_row(y, double(n + 1) * h_);

    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowupThreshold)
      throw BlowupError("simulation diverged at t = " + std::to_string(double(n + 1) * h_) +
                            " s",
                        double(n + 1) * h_);
  }

  for (int i = 2; i < vehicles_; ++i) {
    auto ratio = [](double num, double den) {
      if (num <= kNormFloor) return 0.0;
      if (den <= kNormFloor) return std::numeric_limits<double>::infinity();
      return num / den;
    };
    auto& m = trace.metrics[i];
    m.ratio = ratio(m.supAbsDelta, trace.metrics[i - 1].supAbsDelta);
    m.ratioCorrected =
        ratio(m.supAbsDeltaCorrected, trace.metrics[i - 1].supAbsDeltaCorrected);
    trace.maxRatio = std::max(trace.maxRatio, m.ratio);
    trace.maxRatioCorrected = std::max(trace.maxRatioCorrected, m.ratioCorrected);
  }
  return trace;
}

}  // namespace

void Scenario::validate() const {
  if (nFollowers < 1) throw ConfigError("platoon needs at least one follower");
  if (static_cast<int>(vehicles.size()) != nFollowers)
    throw ConfigError("scenario lists " + std::to_string(vehicles.size()) +
                      " vehicles but nFollowers = " + std::to_string(nFollowers));
  if (!(cruiseSpeed >= 0.0) || !std::isfinite(cruiseSpeed))
    throw ConfigError("cruiseSpeed must be finite and non-negative");
  if (!(stepSize > 0.0)) throw ConfigError("stepSize must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw ConfigError("duration must be positive and finite");
  if (!is_multiple(duration, stepSize))
    throw ConfigError("duration must be an integer multiple of stepSize");
  if (!(recordInterval >= stepSize) || !is_multiple(recordInterval, stepSize))
    throw ConfigError("recordInterval must be a positive multiple of stepSize");
  if (!(settleWindow >= 0.0)) throw ConfigError("settleWindow must be non-negative");
  lead.validate();

  for (int i = 1; i <= nFollowers; ++i) {
    const VehicleConfig& c = vehicles[i - 1];
    const std::string who = "vehicle " + std::to_string(i) + ": ";
    try {
      platoon::validate(c.gains);
    } catch (const ConfigError& e) {
      throw ConfigError(who + e.what());
    }
    if (!c.plant.valid()) throw ConfigError(who + "plant needs 0 < tau <= tau0");
    if (!(c.spacing.d > 0.0)) throw ConfigError(who + "standstill distance must be positive");
    if (std::abs(c.spacing.hw - c.gains.hw) > 1e-12)
      throw ConfigError(who + "spacing policy headway differs from controller headway");
    if (!is_multiple(c.gains.ell, stepSize))
      throw ConfigError(who + "communication delay must be an integer multiple of stepSize");
    if (c.gains.r > i)
      throw ConfigError(who + "uses " + std::to_string(c.gains.r) +
                        " predecessors but only " + std::to_string(i) + " exist");
  }
}

double control_input_cacc(const VehicleState& self, const VehicleState& predecessor,
                          const VehicleState& delayedPredecessor, const ControllerGains& g,
                          const SpacingPolicy& policy) {
  return g.ka * delayedPredecessor.a - g.kv * (self.v - predecessor.v) -
         g.kp * spacing_error(self, predecessor, policy);
}

double control_input_cacc_plus(const VehicleState& self, const VehicleState& predecessor,
                               std::span<const VehicleState> delayed,
                               const ControllerGains& g, const SpacingPolicy& policy) {
  if (static_cast<int>(delayed.size()) < g.r)
    throw ConfigError("multi-predecessor law needs delayed states for all r predecessors");
  double u = control_input_cacc(self, predecessor, delayed[0], g, policy);
  for (int q = 2; q <= g.r; ++q) {
    const VehicleState& other = delayed[q - 1];
    u += g.ka * other.a - g.kv * (self.v - other.v) -
         g.kp * (self.x - other.x + q * policy.d + q * policy.hw * self.v);
  }
  return u;
}

double control_input_cacc(int i, const PlatoonHistory& history, const ControllerGains& g,
                          const SpacingPolicy& policy, double t) {
  if (i < 1) throw ConfigError("vehicle index must be at least 1");
  return control_input_cacc(history.state(i, t), history.state(i - 1, t),
                            history.state(i - 1, t - g.ell), g, policy);
}

double control_input_cacc_plus(int i, const PlatoonHistory& history,
                               const ControllerGains& g, const SpacingPolicy& policy,
                               double t) {
  if (i < g.r) throw ConfigError("vehicle index must be at least r");
  std::vector<VehicleState> delayed;
  delayed.reserve(g.r);
  for (int q = 1; q <= g.r; ++q) delayed.push_back(history.state(i - q, t - g.ell));
  return control_input_cacc_plus(history.state(i, t), history.state(i - 1, t), delayed, g,
                                 policy);
}

VehicleState TraceHistory::state(int vehicle, double t) const {
  const auto& times = trace_.times;
  if (vehicle < 0 || vehicle >= trace_.vehicle_count())
    throw ConfigError("vehicle index out of range");
  if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12)
    throw ConfigError("insufficient history: t = " + std::to_string(t) +
                      " lies outside the recorded span");
  auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t k1 = std::min<std::size_t>(it - times.begin(), times.size() - 1);
  const std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
  if (std::abs(times[k1] - t) <= 1e-12 || k1 == k0)
    return {trace_.x(k1, vehicle), trace_.v(k1, vehicle), trace_.a(k1, vehicle)};
  const double w = (t - times[k0]) / (times[k1] - times[k0]);
  auto lerp = [&](const Eigen::MatrixXd& m) {
    return (1.0 - w) * m(k0, vehicle) + w * m(k1, vehicle);
  };
  return {lerp(trace_.x), lerp(trace_.v), lerp(trace_.a)};
}

SimTrace simulate(const Scenario& scenario) {
  scenario.validate();
  Integrator integrator(scenario);
  return integrator.run();
}

Eigen::VectorXd platoon_length(const SimTrace& trace) {
  return trace.x.col(0) - trace.x.col(trace.vehicle_count() - 1);
}

double delta_amplitude(const SimTrace& trace, int vehicle, double from, double to) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.times[k] < from || trace.times[k] > to) continue;
    lo = std::min(lo, trace.delta(k, vehicle));
    hi = std::max(hi, trace.delta(k, vehicle));
  }
  if (hi < lo) throw ConfigError("no recorded samples in the requested window");
  return 0.5 * (hi - lo);
}

}  // namespace platoon
