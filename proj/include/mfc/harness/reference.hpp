#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mfc/error.hpp"
#include "mfc/plants/schedule.hpp"

namespace mfc {

enum class ReferenceKind { step, ramp, hold_ramp_hold, piecewise };

inline const char* reference_kind_name(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::step: return "step";
    case ReferenceKind::ramp: return "ramp";
    case ReferenceKind::hold_ramp_hold: return "hold-ramp-hold";
    case ReferenceKind::piecewise: return "piecewise";
  }
  return "?";
}

inline ReferenceKind parse_reference_kind(const std::string& s) {
  if (s == "step") return ReferenceKind::step;
  if (s == "ramp") return ReferenceKind::ramp;
  if (s == "hold-ramp-hold") return ReferenceKind::hold_ramp_hold;
  if (s == "piecewise") return ReferenceKind::piecewise;
  throw config_error("reference.kind: unknown kind '" + s + "'");
}

/// Output reference y*(t).
///
/// - ramp, hold-ramp-hold: two breakpoints, linear in between, held outside.
/// - piecewise: linear through the breakpoints; a repeated time is a jump.
/// - step: the level starts at 0 and each breakpoint (t, v) starts a move to v
///   at `max_slope`, so the realized path is always `max_slope`-Lipschitz.
struct ReferenceTrajectory {
  ReferenceKind kind = ReferenceKind::piecewise;
  std::vector<Breakpoint> breakpoints;
  double max_slope = std::numeric_limits<double>::infinity();
};

struct ReferenceSample {
  double value;
  double slope;
};

/// The piecewise-linear path actually followed, times non-decreasing.
inline std::vector<Breakpoint> realized_points(const ReferenceTrajectory& r) {
  const auto& bp = r.breakpoints;
  if (bp.empty()) throw config_error("reference: no breakpoints");
  for (std::size_t i = 1; i < bp.size(); ++i)
    if (bp[i].time < bp[i - 1].time) throw config_error("reference: breakpoint times must be non-decreasing");

  switch (r.kind) {
    case ReferenceKind::ramp:
    case ReferenceKind::hold_ramp_hold:
      if (bp.size() != 2 || !(bp[1].time > bp[0].time))
        throw config_error(std::string("reference: kind ") + reference_kind_name(r.kind) +
                           " needs two breakpoints with increasing times");
      return bp;
    case ReferenceKind::piecewise:
      return bp;
    case ReferenceKind::step: {
      if (!(r.max_slope > 0.0) || !std::isfinite(r.max_slope))
        throw config_error("reference: step kind needs a finite max_slope > 0");
      std::vector<Breakpoint> pts{{0.0, 0.0}};
      double level = 0.0;
      for (const auto& b : bp) {
        if (b.time < pts.back().time)
          throw config_error("reference: step at t = " + std::to_string(b.time) + " starts before the previous one settles");
        if (b.time > pts.back().time) pts.push_back({b.time, level});
        pts.push_back({b.time + std::abs(b.value - level) / r.max_slope, b.value});
        level = b.value;
      }
      return pts;
    }
  }
  return bp;
}

/// Value and right slope of a realized path at t.
inline ReferenceSample reference_on_path(const std::vector<Breakpoint>& pts, double t) {
  if (pts.empty()) throw config_error("reference: no breakpoints");
  if (t < pts.front().time) return {pts.front().value, 0.0};
  if (t >= pts.back().time) return {pts.back().value, 0.0};
  // Last point with time <= t; right-continuous at jumps.
  auto it = std::upper_bound(pts.begin(), pts.end(), t, [](double x, const Breakpoint& b) { return x < b.time; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double slope = (hi.value - lo.value) / (hi.time - lo.time);
  return {lo.value + slope * (t - lo.time), slope};
}

inline ReferenceSample reference_at(const ReferenceTrajectory& r, double t) {
  return reference_on_path(realized_points(r), t);
}

}  // namespace mfc
