#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "platoon/platoon_simulator.hpp"

namespace platoon {
namespace {

// Exact integrals of one linear acceleration segment over [0, h].
struct SegmentIntegral {
  double velocity;
  double position;
};

SegmentIntegral integrate_segment(double a0, double slope, double v0, double h) {
  return {a0 * h + 0.5 * slope * h * h,
          v0 * h + 0.5 * a0 * h * h + slope * h * h * h / 6.0};
}

// Velocity and position change of a piecewise-linear table up to time t.
SegmentIntegral integrate_table(const LeadProfile& p, double t) {
  double velocity = 0.0;
  double position = 0.0;
  if (t <= p.times.front()) return {0.0, 0.0};
  for (std::size_t k = 0; k + 1 < p.times.size(); ++k) {
    const double t0 = p.times[k];
    if (t <= t0) break;
    const double t1 = p.times[k + 1];
    const double slope = (p.accels[k + 1] - p.accels[k]) / (t1 - t0);
    const double h = std::min(t, t1) - t0;
    const auto seg = integrate_segment(p.accels[k], slope, velocity, h);
    velocity += seg.velocity;
    position += seg.position;
  }
  if (t > p.times.back()) position += velocity * (t - p.times.back());
  return {velocity, position};
}

}  // namespace

LeadProfile LeadProfile::paper_sine(double amplitude, double frequency, double startTime,
                                    double endTime) {
  LeadProfile p;
  p.kind = Kind::PaperSine;
  p.amplitude = amplitude;
  p.frequency = frequency;
  p.startTime = startTime;
  p.endTime = endTime < 0.0 ? startTime + 2.0 * std::numbers::pi / frequency : endTime;
  return p;
}

double LeadProfile::acceleration(double t) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::PaperSine:
      return (t > startTime && t < endTime)
                 ? amplitude * std::sin(frequency * (t - startTime))
                 : 0.0;
    case Kind::CustomTable: {
      if (t < times.front() || t > times.back()) return 0.0;
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      if (it == times.end()) return accels.back();
      const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
      const double w = (t - times[k]) / (times[k + 1] - times[k]);
      return (1.0 - w) * accels[k] + w * accels[k + 1];
    }
  }
  return 0.0;
}

double LeadProfile::velocity_change(double t) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::PaperSine: {
      if (t <= startTime) return 0.0;
      const double te = std::min(t, endTime);
      return amplitude / frequency * (1.0 - std::cos(frequency * (te - startTime)));
    }
    case Kind::CustomTable:
      return integrate_table(*this, t).velocity;
  }
  return 0.0;
}

double LeadProfile::position_change(double t) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::PaperSine: {
      if (t <= startTime) return 0.0;
      const double te = std::min(t, endTime);
      const double s = te - startTime;
      const double inside = amplitude / frequency * s -
                            amplitude / (frequency * frequency) * std::sin(frequency * s);
      return t > endTime ? inside + velocity_change(endTime) * (t - endTime) : inside;
    }
    case Kind::CustomTable:
      return integrate_table(*this, t).position;
  }
  return 0.0;
}

double LeadProfile::onset() const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::PaperSine: return startTime;
    case Kind::CustomTable: return times.front();
  }
  return 0.0;
}

void LeadProfile::validate() const {
  switch (kind) {
    case Kind::Zero:
      return;
    case Kind::PaperSine:
      if (!(frequency > 0.0)) throw ConfigError("lead sine frequency must be positive");
      if (!std::isfinite(amplitude)) throw ConfigError("lead amplitude must be finite");
      if (!(startTime >= 0.0)) throw ConfigError("lead startTime must be non-negative");
      if (!(endTime > startTime)) throw ConfigError("lead endTime must exceed startTime");
      return;
    case Kind::CustomTable:
      if (times.size() < 2 || times.size() != accels.size())
        throw ConfigError("lead table needs at least two (time, accel) pairs");
      if (!(times.front() >= 0.0)) throw ConfigError("lead table must start at t >= 0");
      for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k + 1] > times[k]))
          throw ConfigError("lead table times must be strictly increasing");
      for (double a : accels)
        if (!std::isfinite(a)) throw ConfigError("lead table accelerations must be finite");
      return;
  }
}

}  // namespace platoon
