#pragma once

#include <algorithm>

#include <Eigen/Dense>

#include "mfc/error.hpp"
#include "mfc/integrators.hpp"

namespace mfc {

struct BuckParams {
  double source_voltage = 20.0;  // E
  double inductance = 1e-3;      // L
  double capacitance = 1e-5;     // C
};

/// Averaged (continuous-conduction) buck converter:
///   L di/dt = u E - v,   C dv/dt = i - v / R
struct BuckConverter {
  BuckParams params;
  double inductor_current = 0.0;
  double capacitor_voltage = 0.0;
};

inline void check_buck(const BuckParams& p) {
  if (!(p.inductance > 0.0) || !(p.capacitance > 0.0))
    throw config_error("buck converter: L and C must be > 0");
  if (!std::isfinite(p.source_voltage)) throw config_error("buck converter: E must be finite");
}

inline double clamp_duty(double duty) { return std::clamp(duty, 0.0, 1.0); }

/// dv/dt at the current state.
inline double buck_output_derivative(const BuckConverter& b, double load) {
  return (b.inductor_current - b.capacitor_voltage / load) / b.params.capacitance;
}

inline double step_buck(BuckConverter& b, double duty, double load, double h) {
  if (!(load > 0.0)) throw config_error("buck converter: load resistance must be > 0");
  const double d = clamp_duty(duty);
  const auto& p = b.params;
  auto f = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d {
    return {(d * p.source_voltage - x(1)) / p.inductance, (x(0) - x(1) / load) / p.capacitance};
  };
  const Eigen::Vector2d next = rk4_step(f, Eigen::Vector2d(b.inductor_current, b.capacitor_voltage), h);
  b.inductor_current = next(0);
  b.capacitor_voltage = next(1);
  return b.capacitor_voltage;
}

}  // namespace mfc
