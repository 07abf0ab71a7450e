#pragma once

// Mass-spring oscillator m x'' + c x' + k x = 0 and three one-step integrators,
// used to compare how each scheme treats the quadratic energy.

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "mfc/detail/format.hpp"
#include "mfc/error.hpp"

namespace mfc {

struct OscillatorParams {
  double mass = 1.0;
  double stiffness = 1.0;
  double damping = 0.0;
};

struct OscillatorState {
  double x = 0.0;
  double v = 0.0;
};

inline void check_oscillator(const OscillatorParams& p) {
  if (!(p.mass > 0.0) || !(p.stiffness > 0.0)) throw config_error("oscillator: m and k must be > 0");
  if (!(p.damping >= 0.0)) throw config_error("oscillator: damping must be >= 0");
}

inline double oscillator_energy(const OscillatorState& s, const OscillatorParams& p) {
  return 0.5 * p.mass * s.v * s.v + 0.5 * p.stiffness * s.x * s.x;
}

inline double oscillator_acceleration(double x, double v, const OscillatorParams& p) {
  return -(p.stiffness * x + p.damping * v) / p.mass;
}

/// Velocity first, then position with the updated velocity.
inline OscillatorState symplectic_euler_step(const OscillatorState& s, const OscillatorParams& p, double h) {
  const double v = s.v + oscillator_acceleration(s.x, s.v, p) * h;
  return {s.x + v * h, v};
}

inline OscillatorState explicit_euler_step(const OscillatorState& s, const OscillatorParams& p, double h) {
  return {s.x + s.v * h, s.v + oscillator_acceleration(s.x, s.v, p) * h};
}

inline OscillatorState rk4_oscillator_step(const OscillatorState& s, const OscillatorParams& p, double h) {
  auto f = [&](double x, double v) { return OscillatorState{v, oscillator_acceleration(x, v, p)}; };
  const auto k1 = f(s.x, s.v);
  const auto k2 = f(s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v);
  const auto k3 = f(s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v);
  const auto k4 = f(s.x + h * k3.x, s.v + h * k3.v);
  return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

enum class IntegrationMethod { symplectic, explicit_euler, rk4 };

inline const char* method_name(IntegrationMethod m) {
  switch (m) {
    case IntegrationMethod::symplectic: return "symplectic";
    case IntegrationMethod::explicit_euler: return "explicit";
    case IntegrationMethod::rk4: return "rk4";
  }
  return "?";
}

/// Parses one of symplectic, explicit, rk4, all.
inline std::vector<IntegrationMethod> parse_methods(const std::string& name) {
  if (name == "symplectic") return {IntegrationMethod::symplectic};
  if (name == "explicit") return {IntegrationMethod::explicit_euler};
  if (name == "rk4") return {IntegrationMethod::rk4};
  if (name == "all") return {IntegrationMethod::symplectic, IntegrationMethod::explicit_euler, IntegrationMethod::rk4};
  throw config_error("unknown integration method '" + name + "' (expected symplectic, explicit, rk4 or all)");
}

inline OscillatorState oscillator_step(IntegrationMethod m, const OscillatorState& s, const OscillatorParams& p,
                                       double h) {
  switch (m) {
    case IntegrationMethod::symplectic: return symplectic_euler_step(s, p, h);
    case IntegrationMethod::explicit_euler: return explicit_euler_step(s, p, h);
    case IntegrationMethod::rk4: return rk4_oscillator_step(s, p, h);
  }
  return s;
}

struct EnergyDemoConfig {
  double h = 0.01;
  std::size_t steps = 10000;
  OscillatorParams params;
  OscillatorState initial{1.0, 0.0};
  std::vector<IntegrationMethod> methods{IntegrationMethod::symplectic, IntegrationMethod::explicit_euler,
                                         IntegrationMethod::rk4};
};

/// Trajectory of one method, steps + 1 states including the initial one.
inline std::vector<OscillatorState> integrate_oscillator(IntegrationMethod m, const EnergyDemoConfig& c) {
  check_oscillator(c.params);
  if (!(c.h > 0.0)) throw config_error("energy demo: h must be > 0");
  std::vector<OscillatorState> out;
  out.reserve(c.steps + 1);
  out.push_back(c.initial);
  for (std::size_t i = 0; i < c.steps; ++i) out.push_back(oscillator_step(m, out.back(), c.params, c.h));
  return out;
}

/// CSV with columns step,t,x,v,energy,method; methods are stacked one after another.
inline void write_energy_csv(std::ostream& os, const EnergyDemoConfig& c) {
  os << "step,t,x,v,energy,method\n";
  for (auto m : c.methods) {
    const auto traj = integrate_oscillator(m, c);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      os << i << ',' << detail::format_double(static_cast<double>(i) * c.h) << ',' << detail::format_double(traj[i].x) << ','
         << detail::format_double(traj[i].v) << ',' << detail::format_double(oscillator_energy(traj[i], c.params)) << ','
         << method_name(m) << '\n';
    }
  }
}

}  // namespace mfc
