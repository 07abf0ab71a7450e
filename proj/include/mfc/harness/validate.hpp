#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfc/detail/format.hpp"
#include "mfc/harness/scenario.hpp"

namespace mfc {

struct Violation {
  std::string code;  // LIPSCHITZ_REFERENCE, LIPSCHITZ_SCHEDULE, ESTIMATOR_WINDOW, ACTUATOR_BAND
  std::string message;
};

namespace detail {

inline bool slope_within(double slope, double bound) { return std::abs(slope) <= bound * (1.0 + 1e-9); }

}  // namespace detail

/// Checks the bounded-variation assumptions the model-free laws rely on.
/// Never throws; a structurally broken reference is reported as a violation.
inline std::vector<Violation> validate_scenario(const Scenario& s) {
  using detail::format_double;
  std::vector<Violation> out;

  const double K = s.reference.max_slope;
  if (!(K > 0.0) || !std::isfinite(K)) {
    out.push_back({"LIPSCHITZ_REFERENCE", "reference.max_slope must be finite and > 0, got " + format_double(K)});
  } else {
    try {
      const auto pts = realized_points(s.reference);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dt = pts[i].time - pts[i - 1].time;
        const double dv = pts[i].value - pts[i - 1].value;
        if (dt == 0.0 && dv != 0.0) {
          out.push_back({"LIPSCHITZ_REFERENCE", "reference jumps by " + format_double(dv) + " at t = " +
                                                    format_double(pts[i].time)});
        } else if (dt > 0.0 && !detail::slope_within(dv / dt, K)) {
          out.push_back({"LIPSCHITZ_REFERENCE", "reference slope " + format_double(dv / dt) + " on [" +
                                                    format_double(pts[i - 1].time) + ", " + format_double(pts[i].time) +
                                                    "] exceeds max_slope " + format_double(K)});
        }
      }
    } catch (const Error& e) {
      out.push_back({"LIPSCHITZ_REFERENCE", e.what()});
    }
  }

  if (s.plant.kind == PlantKind::buck && s.plant.load.interpolation == Interpolation::linear &&
      s.plant.load.breakpoints.size() > 1) {
    const double actual = schedule_max_slope(s.plant.load);
    if (!s.plant.load_max_slope) {
      out.push_back({"LIPSCHITZ_SCHEDULE", "linear R schedule needs a declared plant.R_max_slope"});
    } else if (!std::isfinite(*s.plant.load_max_slope) || !std::isfinite(actual) ||
               !detail::slope_within(actual, *s.plant.load_max_slope)) {
      out.push_back({"LIPSCHITZ_SCHEDULE", "R schedule slope " + format_double(actual) +
                                               " exceeds plant.R_max_slope " + format_double(*s.plant.load_max_slope)});
    }
  }

  if (s.estimator.window_samples < 3)
    out.push_back({"ESTIMATOR_WINDOW", "estimator.window_samples must be >= 3, got " +
                                           std::to_string(s.estimator.window_samples)});

  if (!std::isfinite(s.actuator.min) || !std::isfinite(s.actuator.max) || !(s.actuator.min <= s.actuator.max))
    out.push_back({"ACTUATOR_BAND", "actuator band [" + format_double(s.actuator.min) + ", " +
                                        format_double(s.actuator.max) + "] is empty"});
  return out;
}

}  // namespace mfc
