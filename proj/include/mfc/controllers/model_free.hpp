#pragma once

// Discrete intelligent PI (i-PI) and its symplectic variant (i-PIS).
//
// i-PI:   u_k = u_{k-1} - (1/alpha)(ydot|_{k-1} - ydot*|_k) + Kp eps + Ki int(eps)
// i-PIS:  the 1/alpha factor becomes gamma_k, evolved by the discrete
//         Euler-Lagrange recursion
//           gamma_{k+1} = -(h^nu/K_alpha * epsdot - 2) gamma_k - gamma_{k-1}
//         and the law gains a feedforward term  sign * K_alpha * (dgamma/dt)^nu.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mfc/error.hpp"

namespace mfc {

struct ControlInputs {
  double y_dot_prev = 0.0;  // estimate of ydot at k-1
  double ystar_dot = 0.0;   // reference slope at k
  double eps = 0.0;         // y* - y at k
  double eps_dot = 0.0;
};

struct IPiConfig {
  double alpha = 1.0;
  int n = 1;
  double kp = 0.0;
  double ki = 0.0;
};

struct IPiState {
  double previous_u = 0.0;
  double corrector_integral = 0.0;
};

struct IPisConfig {
  IPiConfig base;  // base.alpha is alpha0
  int nu = 1;
  double k_alpha = 2.0;
  double alpha_step = 1e-6;    // h of the gamma recursion and of dgamma/dt
  double control_step = 1e-6;  // h of the corrector integral
  int feedforward_sign = 1;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  bool adapt = true;        // false freezes gamma at its current value
  bool feedforward = true;  // false drops the K_alpha (dgamma/dt)^nu term

  double gamma0() const;
};

struct IPisState {
  double previous_u = 0.0;
  double gamma_k = 1.0;
  double gamma_km1 = 1.0;
  double corrector_integral = 0.0;
  double previous_eps_dot = 0.0;
  bool last_update_clamped = false;
  double last_gamma_dot = 0.0;
};

namespace detail {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Common body of both laws so that a frozen i-PIS reproduces i-PI exactly.
inline double model_free_law(double previous_u, double gain, const ControlInputs& in, double kp, double ki,
                             double integral) {
  return previous_u - gain * (in.y_dot_prev - in.ystar_dot) + kp * in.eps + ki * integral;
}

}  // namespace detail

inline double IPisConfig::gamma0() const { return detail::ipow(base.alpha, nu); }

inline void check_ipi(const IPiConfig& c) {
  if (c.alpha == 0.0 || !std::isfinite(c.alpha)) throw config_error("i-PI: alpha must be finite and non-zero");
  if (c.n != 1) throw config_error("i-PI: only derivative order n = 1 is supported");
}

/// Fills the default gamma band [0.1 gamma0, 10 gamma0] where unset and checks the invariants.
inline IPisConfig finalize_ipis(IPisConfig c) {
  check_ipi(c.base);
  if (c.nu < 1) throw config_error("i-PIS: nu must be >= 1");
  if (c.k_alpha == 0.0 || !std::isfinite(c.k_alpha)) throw config_error("i-PIS: K_alpha must be finite and non-zero");
  if (!(c.alpha_step > 0.0) || !(c.control_step > 0.0)) throw config_error("i-PIS: steps must be > 0");
  if (c.feedforward_sign != 1 && c.feedforward_sign != -1) throw config_error("i-PIS: sign must be +1 or -1");
  const double g0 = c.gamma0();
  if (!(g0 > 0.0)) throw config_error("i-PIS: gamma0 = alpha0^nu must be > 0");
  if (c.gamma_min == 0.0 && c.gamma_max == 0.0) {
    c.gamma_min = 0.1 * g0;
    c.gamma_max = 10.0 * g0;
  }
  if (!(c.gamma_min > 0.0) || !(c.gamma_max >= c.gamma_min))
    throw config_error("i-PIS: gamma band must satisfy 0 < gamma_min <= gamma_max");
  return c;
}

inline IPisState initial_ipis_state(const IPisConfig& c) {
  IPisState s;
  s.gamma_k = s.gamma_km1 = c.gamma0();
  return s;
}

inline double ipi_step(IPiState& s, const IPiConfig& c, const ControlInputs& in, double h) {
  s.corrector_integral += in.eps * h;
  const double u = detail::model_free_law(s.previous_u, 1.0 / c.alpha, in, c.kp, c.ki, s.corrector_integral);
  s.previous_u = u;
  return u;
}

/// Raw recursion, no clamping.
inline double gamma_recursion(double gamma_k, double gamma_km1, double eps_dot, const IPisConfig& c) {
  const double hn = detail::ipow(c.alpha_step, c.nu);
  return -(hn / c.k_alpha * eps_dot - 2.0) * gamma_k - gamma_km1;
}

inline double ipis_alpha_update(double gamma_k, double gamma_km1, double eps_dot, const IPisConfig& c) {
  return std::clamp(gamma_recursion(gamma_k, gamma_km1, eps_dot, c), c.gamma_min, c.gamma_max);
}

inline double ipis_step(IPisState& s, const IPisConfig& c, const ControlInputs& in) {
  double gamma_next = s.gamma_k;
  s.last_update_clamped = false;
  if (c.adapt) {
    const double raw = gamma_recursion(s.gamma_k, s.gamma_km1, in.eps_dot, c);
    gamma_next = std::clamp(raw, c.gamma_min, c.gamma_max);
    s.last_update_clamped = gamma_next != raw;
  }
  const double gamma_dot = (gamma_next - s.gamma_k) / c.alpha_step;

  s.corrector_integral += in.eps * c.control_step;
  double u = detail::model_free_law(s.previous_u, s.gamma_k, in, c.base.kp, c.base.ki, s.corrector_integral);
  if (c.feedforward) u += c.feedforward_sign * c.k_alpha * detail::ipow(gamma_dot, c.nu);

  s.gamma_km1 = s.gamma_k;
  s.gamma_k = gamma_next;
  s.previous_u = u;
  s.previous_eps_dot = in.eps_dot;
  s.last_gamma_dot = gamma_dot;
  return u;
}

inline double el_residual(double gamma_km1, double gamma_k, double gamma_kp1, double eps_dot, const IPisConfig& c) {
  return gamma_k * eps_dot + c.k_alpha * (gamma_kp1 - 2.0 * gamma_k + gamma_km1) / detail::ipow(c.alpha_step, c.nu);
}

/// Conditioning scale of el_residual: the largest term it sums.
inline double el_residual_scale(double gamma_km1, double gamma_k, double gamma_kp1, double eps_dot,
                                const IPisConfig& c) {
  const double second = std::abs(c.k_alpha) * (std::abs(gamma_kp1) + 2.0 * std::abs(gamma_k) + std::abs(gamma_km1)) /
                        detail::ipow(c.alpha_step, c.nu);
  return std::max({1.0, std::abs(gamma_k * eps_dot), second});
}

struct CriterionSample {
  double eps = 0.0;
  double eps_dot = 0.0;
  double gamma = 0.0;
  double gamma_dot = 0.0;
};

struct CriterionValue {
  double lagrangian = 0.0;  // integral of (gamma epsdot + K_alpha gammadot^nu) / Kp
  double tracking = 0.0;    // integral of eps
};

/// Both sides of the variational criterion, rectangle rule with step h.
inline CriterionValue alpha_criterion(const std::vector<CriterionSample>& segment, double kp, double k_alpha, int nu,
                                      double h) {
  if (segment.empty()) throw config_error("alpha_criterion: empty segment");
  if (kp == 0.0) throw config_error("alpha_criterion: Kp must be non-zero");
  CriterionValue v;
  for (const auto& s : segment) {
    v.lagrangian += (s.gamma * s.eps_dot + k_alpha * detail::ipow(s.gamma_dot, nu)) / kp * h;
    v.tracking += s.eps * h;
  }
  return v;
}

}  // namespace mfc
