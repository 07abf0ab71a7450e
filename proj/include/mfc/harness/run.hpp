#pragma once

// Fixed-step closed-loop executor. Step k at t = k h:
//   measure y, update the estimator windows, form the control inputs,
//   compute u, clamp it, record, then advance the plant to t + h.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mfc/controllers.hpp"
#include "mfc/detail/format.hpp"
#include "mfc/error.hpp"
#include "mfc/harness/reference.hpp"
#include "mfc/harness/scenario.hpp"
#include "mfc/harness/validate.hpp"
#include "mfc/plants.hpp"
#include "mfc/signal_estimation.hpp"

#ifndef MFC_VERSION
#define MFC_VERSION "0.0.0"
#endif

namespace mfc {

inline constexpr const char* version = MFC_VERSION;
inline constexpr double divergence_bound = 1e9;

enum ClampFlag : unsigned { clamp_actuator = 1u, clamp_gamma = 2u };

struct TraceRecord {
  double t = 0.0;
  double ystar = 0.0;
  double y = 0.0;       // true plant output
  double y_meas = 0.0;  // with measurement noise
  double y_hat = 0.0;   // denoised estimate
  double u = 0.0;       // applied (clamped) input
  double eps = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  unsigned clamped = 0;
};

struct Trace {
  std::string scenario_name;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<Violation> forced_violations;
  double h = 0.0;
  std::vector<TraceRecord> records;
};

struct RunMetrics {
  double iae = 0.0;
  double steady_state_error = 0.0;
  double overshoot = 0.0;
  std::optional<double> settling_time;  // empty when not settled
  std::size_t gamma_clamp_count = 0;
  double alpha_final_window_mean = 0.0;
  double alpha_final_window_std = 0.0;
  std::size_t records = 0;
};

/// Per-step controller internals, for diagnostics and property checks.
struct StepInfo {
  std::size_t k = 0;
  double t = 0.0;
  ControlInputs inputs;
  double u_raw = 0.0;
  double u_applied = 0.0;
  bool has_gamma = false;
  double gamma_km1 = 0.0;
  double gamma_k = 0.0;
  double gamma_kp1 = 0.0;
  double gamma_dot = 0.0;
  bool gamma_clamped = false;
  const IPisConfig* ipis = nullptr;
};

struct RunOptions {
  bool force = false;
  std::function<void(const StepInfo&)> observer;
};

struct RunResult {
  Trace trace;
  RunMetrics metrics;
};

inline IPisConfig ipis_config_for(const Scenario& s) {
  const auto& c = s.controller;
  IPisConfig cfg;
  cfg.base = {c.alpha0, 1, c.kp, c.ki};
  cfg.nu = c.nu;
  cfg.k_alpha = c.k_alpha;
  cfg.alpha_step = c.h_alpha.value_or(s.sim.h);
  cfg.control_step = s.sim.h;
  cfg.feedforward_sign = c.sign;
  if (c.gamma_band) {
    cfg.gamma_min = c.gamma_band->first;
    cfg.gamma_max = c.gamma_band->second;
  }
  cfg.adapt = !c.freeze_gamma;
  cfg.feedforward = c.feedforward;
  return finalize_ipis(cfg);
}

inline PidGains pid_gains_for(const Scenario& s) {
  const auto& c = s.controller;
  return c.broida ? broida_gains(*c.broida) : PidGains{c.kp, c.ki, c.kd};
}

/// Fraction-of-span overshoot, settling band 2% of the reference span.
inline RunMetrics compute_metrics(const Trace& tr) {
  const auto& r = tr.records;
  if (r.empty()) throw config_error("compute_metrics: empty trace");
  RunMetrics m;
  m.records = r.size();
  const double h = tr.h;

  for (std::size_t k = 0; k + 1 < r.size(); ++k) m.iae += std::abs(r[k].eps) * h;

  const std::size_t tail = std::max<std::size_t>(1, r.size() / 10);
  const std::size_t first_tail = r.size() - tail;
  double sum = 0.0;
  for (std::size_t k = first_tail; k < r.size(); ++k) sum += std::abs(r[k].eps);
  m.steady_state_error = sum / static_cast<double>(tail);

  double ymin = r[0].ystar, ymax = r[0].ystar;
  for (const auto& x : r) {
    ymin = std::min(ymin, x.ystar);
    ymax = std::max(ymax, x.ystar);
  }
  const double span = r.back().ystar - r.front().ystar;
  if (span != 0.0) {
    double worst = 0.0;
    for (const auto& x : r) worst = std::max(worst, (x.y - r.back().ystar) / span);
    m.overshoot = worst;
  }

  const double band = 0.02 * (ymax - ymin);
  std::optional<std::size_t> last_out;
  for (std::size_t k = r.size(); k-- > 0;)
    if (std::abs(r[k].eps) > band) {
      last_out = k;
      break;
    }
  if (!last_out) m.settling_time = r.front().t;
  else if (*last_out + 1 < r.size()) m.settling_time = r[*last_out + 1].t;

  for (const auto& x : r)
    if (x.clamped & clamp_gamma) ++m.gamma_clamp_count;

  double asum = 0.0;
  for (std::size_t k = first_tail; k < r.size(); ++k) asum += r[k].alpha;
  m.alpha_final_window_mean = asum / static_cast<double>(tail);
  double var = 0.0;
  for (std::size_t k = first_tail; k < r.size(); ++k)
    var += (r[k].alpha - m.alpha_final_window_mean) * (r[k].alpha - m.alpha_final_window_mean);
  m.alpha_final_window_std = std::sqrt(var / static_cast<double>(tail));
  return m;
}

inline RunResult run_closed_loop(const Scenario& s, const RunOptions& opts = {}) {
  check_scenario(s);
  auto violations = validate_scenario(s);
  if (!violations.empty() && !opts.force) {
    std::string msg = "scenario '" + s.name + "' has violations:";
    for (const auto& v : violations) msg += " " + v.code;
    throw config_error(msg);
  }
  if (s.estimator.window_samples < 3) throw config_error("estimator.window_samples must be >= 3 to run");

  const double h = s.sim.h;
  const std::size_t N = step_count(s.sim);
  const double hs = h / static_cast<double>(s.sim.plant_substeps);
  const auto path = realized_points(s.reference);

  // Plant.
  StateSpacePlant lti;
  StateSpacePlant aged;
  bool is_aged = false;
  BuckConverter buck;
  if (s.plant.kind == PlantKind::lti) {
    lti = realize(s.plant.tf);
    if (s.plant.ageing_time) aged = realize({s.plant.tf.numerator, s.plant.ageing_denominator});
  } else {
    buck.params = s.plant.buck;
  }
  NoiseSource noise(s.noise.seed, s.noise.amplitude);

  // Estimators.
  const auto window = static_cast<std::size_t>(s.estimator.window_samples);
  SlidingWindow yw = SlidingWindow::with_samples(window, h);
  SlidingWindow ew = SlidingWindow::with_samples(window, h);
  const bool ideal = s.estimator.mode == EstimatorMode::ideal;

  // Controller.
  const auto kind = s.controller.kind;
  PidGains pid_gains{};
  PidState pid;
  IPiConfig ipi_cfg{s.controller.alpha0, 1, s.controller.kp, s.controller.ki};
  IPiState ipi;
  IPisConfig ipis_cfg;
  IPisState ipis;
  if (kind == ControllerKind::pid) pid_gains = pid_gains_for(s);
  if (kind == ControllerKind::ipi) check_ipi(ipi_cfg);
  if (kind == ControllerKind::ipis) {
    ipis_cfg = ipis_config_for(s);
    ipis = initial_ipis_state(ipis_cfg);
  }

  Trace tr;
  tr.scenario_name = s.name;
  tr.scenario_hash = scenario_hash(s);
  tr.seed = s.noise.seed;
  tr.version = version;
  tr.forced_violations = violations;
  tr.h = h;
  tr.records.reserve(N + 1);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double u_applied = 0.0;
  double y_prev = 0.0, eps_prev = 0.0;

  for (std::size_t k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) * h;

    const double y_true = s.plant.kind == PlantKind::lti ? lti_output(lti, u_applied) : buck.capacitor_voltage;
    const double y_meas = noise.measure(y_true);
    const auto ref = reference_on_path(path, t);
    const double eps = ref.value - y_meas;
    yw.push(t, y_meas);
    ew.push(t, eps);

    ControlInputs in;
    in.ystar_dot = ref.slope;
    in.eps = eps;
    double y_hat = y_meas;
    if (ideal) {
      in.y_dot_prev = s.plant.kind == PlantKind::lti
                          ? lti_output_derivative(lti, u_applied)
                          : buck_output_derivative(buck, schedule_value(s.plant.load, t));
      in.eps_dot = ref.slope - in.y_dot_prev;
      y_hat = y_true;
    } else if (yw.full()) {
      in.y_dot_prev = estimate_derivative(yw);
      in.eps_dot = estimate_derivative(ew);
      y_hat = estimate_value(yw);
    } else if (k > 0) {
      in.y_dot_prev = (y_meas - y_prev) / h;
      in.eps_dot = (eps - eps_prev) / h;
    }
    y_prev = y_meas;
    eps_prev = eps;

    StepInfo info;
    info.k = k;
    info.t = t;
    info.inputs = in;

    TraceRecord rec;
    double u_raw = 0.0;
    double saved_integral = 0.0;
    switch (kind) {
      case ControllerKind::pid:
        saved_integral = pid.integral_of_error;
        u_raw = pid_step(pid, pid_gains, eps, h);
        rec.alpha = rec.gamma = nan;
        break;
      case ControllerKind::ipi:
        if (s.controller.alpha_ramp) ipi_cfg.alpha = s.controller.alpha_ramp->first + s.controller.alpha_ramp->second * t;
        saved_integral = ipi.corrector_integral;
        u_raw = ipi_step(ipi, ipi_cfg, in, h);
        rec.alpha = ipi_cfg.alpha;
        rec.gamma = 1.0 / ipi_cfg.alpha;
        break;
      case ControllerKind::ipis:
        saved_integral = ipis.corrector_integral;
        info.has_gamma = true;
        info.gamma_km1 = ipis.gamma_km1;
        info.gamma_k = ipis.gamma_k;
        u_raw = ipis_step(ipis, ipis_cfg, in);
        info.gamma_kp1 = ipis.gamma_k;
        info.gamma_dot = ipis.last_gamma_dot;
        info.gamma_clamped = ipis.last_update_clamped;
        info.ipis = &ipis_cfg;
        rec.gamma = info.gamma_k;
        rec.alpha = ipis_cfg.nu == 1 ? info.gamma_k : std::pow(info.gamma_k, 1.0 / ipis_cfg.nu);
        if (ipis.last_update_clamped) rec.clamped |= clamp_gamma;
        break;
    }

    if (!std::isfinite(y_true) || std::abs(y_true) > divergence_bound || !std::isfinite(u_raw) ||
        std::abs(u_raw) > divergence_bound)
      throw DivergenceError(k, t, "closed loop diverged at step " + std::to_string(k) + " (t = " +
                                      detail::format_double(t) + "): y = " + detail::format_double(y_true) +
                                      ", u = " + detail::format_double(u_raw));

    u_applied = std::clamp(u_raw, s.actuator.min, s.actuator.max);
    if (u_applied != u_raw) {
      rec.clamped |= clamp_actuator;
      switch (kind) {
        case ControllerKind::pid: pid.integral_of_error = saved_integral; break;
        case ControllerKind::ipi:
          ipi.corrector_integral = saved_integral;
          ipi.previous_u = u_applied;
          break;
        case ControllerKind::ipis:
          ipis.corrector_integral = saved_integral;
          ipis.previous_u = u_applied;
          break;
      }
    }
    info.u_raw = u_raw;
    info.u_applied = u_applied;
    if (opts.observer) opts.observer(info);

    rec.t = t;
    rec.ystar = ref.value;
    rec.y = y_true;
    rec.y_meas = y_meas;
    rec.y_hat = y_hat;
    rec.u = u_applied;
    rec.eps = eps;
    tr.records.push_back(rec);

    if (k == N) break;
    for (long j = 0; j < s.sim.plant_substeps; ++j) {
      const double ts = t + static_cast<double>(j) * hs;
      if (s.plant.kind == PlantKind::lti) {
        if (s.plant.ageing_time && !is_aged && ts >= *s.plant.ageing_time) {
          aged.state = lti.state;
          lti = aged;
          is_aged = true;
        }
        step_lti(lti, u_applied, hs);
      } else {
        step_buck(buck, u_applied, schedule_value(s.plant.load, ts), hs);
      }
    }
  }

  RunResult out{std::move(tr), {}};
  out.metrics = compute_metrics(out.trace);
  return out;
}

inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  using detail::format_double;
  os << "# scenario: " << tr.scenario_name << '\n';
  os << "# scenario_hash: " << tr.scenario_hash << '\n';
  os << "# seed: " << tr.seed << '\n';
  os << "# version: " << tr.version << '\n';
  if (!tr.forced_violations.empty()) {
    os << "# forced_violations:";
    for (const auto& v : tr.forced_violations) os << ' ' << v.code;
    os << '\n';
  }
  os << "t,ystar,y,y_meas,y_hat,u,eps,alpha,gamma,clamped\n";
  for (const auto& r : tr.records) {
    os << format_double(r.t) << ',' << format_double(r.ystar) << ',' << format_double(r.y) << ','
       << format_double(r.y_meas) << ',' << format_double(r.y_hat) << ',' << format_double(r.u) << ','
       << format_double(r.eps) << ',' << format_double(r.alpha) << ',' << format_double(r.gamma) << ',' << r.clamped
       << '\n';
  }
}

inline std::string settling_text(const RunMetrics& m) {
  return m.settling_time ? detail::format_double(*m.settling_time) : "not_settled";
}

inline void write_metrics(std::ostream& os, const RunMetrics& m) {
  using detail::format_double;
  os << "iae = " << format_double(m.iae) << '\n'
     << "steady_state_error = " << format_double(m.steady_state_error) << '\n'
     << "overshoot = " << format_double(m.overshoot) << '\n'
     << "settling_time = " << settling_text(m) << '\n'
     << "gamma_clamp_count = " << m.gamma_clamp_count << '\n'
     << "alpha_final_window_mean = " << format_double(m.alpha_final_window_mean) << '\n'
     << "alpha_final_window_std = " << format_double(m.alpha_final_window_std) << '\n'
     << "records = " << m.records << '\n';
}

}  // namespace mfc
