#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfc/error.hpp"

namespace mfc {

struct Breakpoint {
  double time;
  double value;
};

enum class Interpolation { hold, linear };

/// Piecewise parameter profile (load resistance, for instance).
struct ParameterSchedule {
  std::vector<Breakpoint> breakpoints;
  Interpolation interpolation = Interpolation::hold;

  static ParameterSchedule constant(double value) { return {{{0.0, value}}, Interpolation::hold}; }
};

inline void check_schedule(const ParameterSchedule& s) {
  if (s.breakpoints.empty()) throw config_error("schedule: no breakpoints");
  for (std::size_t i = 1; i < s.breakpoints.size(); ++i)
    if (!(s.breakpoints[i].time > s.breakpoints[i - 1].time))
      throw config_error("schedule: breakpoint times must be strictly increasing");
}

inline double schedule_value(const ParameterSchedule& s, double t) {
  if (s.breakpoints.empty()) throw config_error("schedule: no breakpoints");
  const auto& bp = s.breakpoints;
  if (t <= bp.front().time) return bp.front().value;
  if (t >= bp.back().time) return bp.back().value;
  auto next = std::upper_bound(bp.begin(), bp.end(), t,
                               [](double x, const Breakpoint& b) { return x < b.time; });
  const auto& hi = *next;
  const auto& lo = *(next - 1);
  if (s.interpolation == Interpolation::hold) return lo.value;
  return lo.value + (hi.value - lo.value) * (t - lo.time) / (hi.time - lo.time);
}

/// Largest |dvalue/dt| over the segments; zero for hold schedules and single points.
inline double schedule_max_slope(const ParameterSchedule& s) {
  if (s.interpolation == Interpolation::hold) return 0.0;
  double m = 0.0;
  for (std::size_t i = 1; i < s.breakpoints.size(); ++i) {
    const auto& a = s.breakpoints[i - 1];
    const auto& b = s.breakpoints[i];
    m = std::max(m, std::abs((b.value - a.value) / (b.time - a.time)));
  }
  return m;
}

}  // namespace mfc
