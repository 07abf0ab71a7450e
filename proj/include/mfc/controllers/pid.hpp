#pragma once

#include <cmath>

#include "mfc/error.hpp"

namespace mfc {

struct PidGains {
  double kp = 0.0;  // dimensionless
  double ki = 0.0;  // 1/s
  double kd = 0.0;  // s
};

struct PidState {
  double integral_of_error = 0.0;
  double previous_error = 0.0;
};

/// First-order-plus-delay approximation K e^{-tau s} / (T s + 1).
struct BroidaModel {
  double gain = 0.0;
  double time_constant = 0.0;
  double delay = 0.0;
};

inline PidGains broida_gains(const BroidaModel& m) {
  if (m.gain == 0.0 || !(m.time_constant > 0.0) || !(m.delay > 0.0))
    throw config_error("broida model needs K != 0, T > 0 and tau > 0");
  const double K = m.gain, T = m.time_constant, tau = m.delay;
  return {100.0 * (0.4 * tau + T) / (120.0 * K * tau), 1.0 / (1.33 * K * tau), 0.35 * T / K};
}

/// Parallel PID; rectangle-rule integral, backward-difference derivative.
inline double pid_step(PidState& s, const PidGains& g, double eps, double h) {
  s.integral_of_error += eps * h;
  const double derivative = (eps - s.previous_error) / h;
  s.previous_error = eps;
  return g.kp * eps + g.ki * s.integral_of_error + g.kd * derivative;
}

}  // namespace mfc
