#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "mfc/harness.hpp"

using namespace mfc;
using Catch::Approx;

namespace {

const std::filesystem::path presets(MFC_PRESET_DIR);

Scenario integrator_scenario() {
  Scenario s;
  s.name = "integrator";
  s.plant.tf = {{1.0}, {1.0, 0.0}};
  s.controller.kind = ControllerKind::ipi;
  s.controller.alpha0 = 1.0;
  s.controller.kp = 2.0;
  s.reference = {ReferenceKind::step, {{0.5, 1.0}}, 10.0};
  s.estimator.window_samples = 3;
  s.sim = {1e-3, 5.0, 1};
  return s;
}

std::string csv(const Trace& t) {
  std::ostringstream o;
  write_trace_csv(o, t);
  return o.str();
}

Trace synthetic(const std::vector<double>& eps, double h) {
  Trace t;
  t.h = h;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    TraceRecord r;
    r.t = static_cast<double>(k) * h;
    r.eps = eps[k];
    t.records.push_back(r);
  }
  return t;
}

double post_shift_iae(const Trace& t, double from) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < t.records.size(); ++k)
    if (t.records[k].t >= from) acc += std::abs(t.records[k].eps) * t.h;
  return acc;
}

}  // namespace

TEST_CASE("compute_metrics on synthetic traces") {
  const auto zero = compute_metrics(synthetic(std::vector<double>(101, 0.0), 0.01));
  CHECK(zero.iae == 0.0);
  REQUIRE(zero.settling_time);
  CHECK(*zero.settling_time == 0.0);

  const auto one = compute_metrics(synthetic(std::vector<double>(201, 1.0), 0.01));
  CHECK(one.iae == Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(one.settling_time);
  CHECK(one.steady_state_error == 1.0);

  std::vector<double> e(10001);
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(-1e-3 * static_cast<double>(k));
  CHECK(std::abs(compute_metrics(synthetic(e, 1e-3)).iae - 1.0) <= 1e-3);

  CHECK_THROWS_AS(compute_metrics(Trace{}), Error);
}

TEST_CASE("i-PI on an integrator plant settles") {
  const auto r = run_closed_loop(integrator_scenario());
  CHECK(r.metrics.steady_state_error < 1e-3);
  CHECK(r.metrics.settling_time);
}

TEST_CASE("zero reference gives an all-zero trace") {
  for (auto kind : {ControllerKind::pid, ControllerKind::ipi, ControllerKind::ipis}) {
    auto s = integrator_scenario();
    s.plant.tf = {{1, 4, 4}, {1, 3, 3, 1}};
    s.controller.kind = kind;
    s.controller.ki = 0.5;
    s.controller.kd = 0.1;
    s.reference = {ReferenceKind::piecewise, {{0.0, 0.0}}, 1.0};
    s.sim.duration = 1.0;
    const auto r = run_closed_loop(s);
    CHECK(r.metrics.iae == 0.0);
    for (const auto& x : r.trace.records) {
      REQUIRE(x.y == 0.0);
      REQUIRE(x.u == 0.0);
      REQUIRE(x.eps == 0.0);
    }
  }
}

TEST_CASE("grid integrity and record count") {
  auto s = integrator_scenario();
  s.sim = {0.003, 1.0, 1};
  const auto r = run_closed_loop(s);
  REQUIRE(r.trace.records.size() == 334);
  for (std::size_t k = 0; k < r.trace.records.size(); ++k) REQUIRE(r.trace.records[k].t == static_cast<double>(k) * 0.003);
  s.sim = {1e-3, 2.0, 1};
  CHECK(run_closed_loop(s).trace.records.size() == 2001);
}

TEST_CASE("runs are deterministic, including noise") {
  auto s = load_scenario((presets / "buck-ipis-load.scn").string());
  s.noise = {123, 0.01};
  s.sim.duration = 0.004;
  const auto a = csv(run_closed_loop(s).trace);
  const auto b = csv(run_closed_loop(s).trace);
  CHECK(a == b);
  s.noise.seed = 124;
  CHECK(csv(run_closed_loop(s).trace) != a);
}

TEST_CASE("applied input stays inside the actuator band") {
  auto s = load_scenario((presets / "buck-ipi.scn").string());
  s.sim.duration = 0.005;
  const auto r = run_closed_loop(s);
  bool saw_clamp = false;
  for (const auto& x : r.trace.records) {
    REQUIRE(x.u >= 0.0);
    REQUIRE(x.u <= 1.0);
    saw_clamp = saw_clamp || (x.clamped & clamp_actuator);
  }
  CHECK(saw_clamp);
}

TEST_CASE("integral is frozen while the actuator saturates") {
  auto s = integrator_scenario();
  s.controller.kind = ControllerKind::pid;
  s.controller.kp = 0.0;
  s.controller.ki = 1.0;
  s.actuator = {-0.05, 0.05};
  s.sim.duration = 3.0;
  // Without anti-windup the raw integral action would climb towards the
  // accumulated error (~1 after a second); frozen, it never exceeds the band by
  // more than one step's increment.
  double worst_raw = 0.0;
  std::size_t saturated = 0;
  RunOptions o;
  o.observer = [&](const StepInfo& i) {
    worst_raw = std::max(worst_raw, std::abs(i.u_raw));
    if (i.u_raw != i.u_applied) ++saturated;
  };
  const auto r = run_closed_loop(s, o);
  CHECK(saturated > 100);
  CHECK(worst_raw <= 0.05 + 1e-3 * 1.0 + 1e-12);
  for (const auto& x : r.trace.records) CHECK(std::abs(x.u) <= 0.05);
}

TEST_CASE("divergence is reported with the step index") {
  auto s = integrator_scenario();
  s.plant.tf = {{1, 4, 4}, {1, 3, 3, 1}};
  s.controller.kind = ControllerKind::ipi;
  s.controller.alpha0 = 0.01;
  s.estimator.window_samples = 50;
  s.actuator = {-1e15, 1e15};
  try {
    run_closed_loop(s);
    FAIL("no divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() > 0);
    CHECK(e.time() == Approx(static_cast<double>(e.step()) * 1e-3));
    CHECK(std::string(e.what()).find("step " + std::to_string(e.step())) != std::string::npos);
  }
}

TEST_CASE("violations block a run unless forced") {
  auto s = integrator_scenario();
  s.reference = {ReferenceKind::piecewise, {{0.0, 0.0}, {0.5, 0.0}, {0.5, 1.0}}, 10.0};
  CHECK_THROWS_AS(run_closed_loop(s), Error);
  const auto r = run_closed_loop(s, {true, {}});
  REQUIRE(r.trace.forced_violations.size() == 1);
  CHECK(csv(r.trace).find("# forced_violations: LIPSCHITZ_REFERENCE") != std::string::npos);
}

TEST_CASE("frozen i-PIS reproduces i-PI at harness level") {
  for (const char* file : {"buck-ipi.scn", "lti-ipi.scn"}) {
    auto a = load_scenario((presets / file).string());
    a.sim.duration = std::min(a.sim.duration, a.plant.kind == PlantKind::buck ? 0.004 : 5.0);
    a.noise = {9, a.plant.kind == PlantKind::buck ? 0.01 : 1e-4};
    auto b = a;
    b.controller.kind = ControllerKind::ipis;
    b.controller.alpha0 = 1.0 / a.controller.alpha0;
    b.controller.freeze_gamma = true;
    b.controller.feedforward = false;
    const auto ta = run_closed_loop(a).trace;
    const auto tb = run_closed_loop(b).trace;
    REQUIRE(ta.records.size() == tb.records.size());
    for (std::size_t k = 0; k < ta.records.size(); ++k) {
      const auto& x = ta.records[k];
      const auto& y = tb.records[k];
      REQUIRE(x.u == y.u);
      REQUIRE(x.y == y.y);
      REQUIRE(x.y_meas == y.y_meas);
      REQUIRE(x.eps == y.eps);
      REQUIRE(x.gamma == y.gamma);
      REQUIRE(x.clamped == y.clamped);
      REQUIRE(x.alpha == Approx(1.0 / y.alpha).epsilon(1e-15));
    }
  }
}

TEST_CASE("PID trace leaves alpha and gamma empty") {
  auto s = integrator_scenario();
  s.controller.kind = ControllerKind::pid;
  s.controller.kp = 1.0;
  s.sim.duration = 0.01;
  const auto text = csv(run_closed_loop(s).trace);
  CHECK(text.find(",nan,nan,") != std::string::npos);
  CHECK(text.find("t,ystar,y,y_meas,y_hat,u,eps,alpha,gamma,clamped\n") != std::string::npos);
}

TEST_CASE("ideal estimator mode feeds exact derivatives") {
  auto s = load_scenario((presets / "lti-ipi.scn").string());
  s.estimator.mode = EstimatorMode::ideal;
  s.sim.duration = 10.0;
  const auto r = run_closed_loop(s);
  CHECK(r.metrics.steady_state_error < 1e-3);
}

TEST_CASE("plant substeps leave the control grid unchanged") {
  auto s = load_scenario((presets / "buck-ipis.scn").string());
  s.sim.duration = 0.004;
  const auto one = run_closed_loop(s);
  s.sim.plant_substeps = 4;
  const auto four = run_closed_loop(s);
  REQUIRE(one.trace.records.size() == four.trace.records.size());
  CHECK(four.metrics.iae == Approx(one.metrics.iae).epsilon(0.05));
}

TEST_CASE("LTI ageing: i-PI settles on both sides, PID loses more after the shift") {
  const auto ipi = run_closed_loop(load_scenario((presets / "lti-ageing-ipi.scn").string()));
  const auto pid = run_closed_loop(load_scenario((presets / "lti-ageing-pid.scn").string()));
  // Settled just before the shift and at the end.
  const auto& before = ipi.trace.records[19999];
  CHECK(std::abs(before.eps) < 0.01);
  CHECK(ipi.metrics.settling_time);
  CHECK(post_shift_iae(ipi.trace, 20.0) < post_shift_iae(pid.trace, 20.0));
}

TEST_CASE("observer sees gamma triples that satisfy the discrete Euler-Lagrange equation") {
  auto s = load_scenario((presets / "buck-ipis-load.scn").string());
  std::size_t checked = 0;
  double worst = 0.0;
  RunOptions o;
  o.observer = [&](const StepInfo& i) {
    if (!i.has_gamma || i.gamma_clamped) return;
    const double r = el_residual(i.gamma_km1, i.gamma_k, i.gamma_kp1, i.inputs.eps_dot, *i.ipis);
    const double scale = el_residual_scale(i.gamma_km1, i.gamma_k, i.gamma_kp1, i.inputs.eps_dot, *i.ipis);
    worst = std::max(worst, std::abs(r) / scale);
    ++checked;
  };
  run_closed_loop(s, o);
  CHECK(checked > 10000);
  CHECK(worst <= 1e-9);
}

TEST_CASE("alpha initial condition: alpha0 = 3 and 10 end close") {
  const auto a = run_closed_loop(load_scenario((presets / "buck-ipis-load.scn").string()));
  const auto b = run_closed_loop(load_scenario((presets / "buck-ipis-load-a10.scn").string()));
  REQUIRE(a.metrics.settling_time);
  REQUIRE(b.metrics.settling_time);
  const double sa = a.metrics.steady_state_error, sb = b.metrics.steady_state_error;
  CHECK(std::abs(sa - sb) / std::max(sa, sb) < 0.5);
}

namespace {

struct CriterionCheck {
  CriterionValue value;
  std::size_t saturated_steps = 0;
};

// Both sides of the variational criterion over the final fraction of a run.
CriterionCheck criterion_over_tail(const Scenario& s, double fraction) {
  std::vector<CriterionSample> seg;
  std::vector<bool> saturated;
  RunOptions o;
  o.observer = [&](const StepInfo& i) {
    seg.push_back({i.inputs.eps, i.inputs.y_dot_prev - i.inputs.ystar_dot, i.gamma_k, i.gamma_dot});
    saturated.push_back(i.u_raw != i.u_applied || i.gamma_clamped);
  };
  run_closed_loop(s, o);
  const auto n = static_cast<std::size_t>(static_cast<double>(seg.size()) * fraction);
  CriterionCheck c;
  for (std::size_t k = seg.size() - n; k < seg.size(); ++k) c.saturated_steps += saturated[k];
  const auto cfg = ipis_config_for(s);
  c.value = alpha_criterion({seg.end() - static_cast<long>(n), seg.end()}, cfg.base.kp, cfg.k_alpha, cfg.nu, s.sim.h);
  return c;
}

double relative_gap(const CriterionValue& v) {
  return std::abs(v.lagrangian - v.tracking) / std::max(std::abs(v.lagrangian), std::abs(v.tracking));
}

}  // namespace

TEST_CASE("criterion sides agree on an unsaturated i-PIS segment") {
  // With no clamping and Ki = 0 the law rearranges to Kp eps = du + gamma (ydot - ydot*) + K_alpha gammadot,
  // so the two integrals differ only by the telescoped du term.
  auto s = load_scenario((presets / "lti-ipi.scn").string());
  s.controller.kind = ControllerKind::ipis;
  s.controller.ki = 0.0;
  s.controller.sign = -1;
  s.controller.h_alpha = 1e-6;
  const auto c = criterion_over_tail(s, 0.1);
  REQUIRE(c.saturated_steps == 0);
  CHECK(relative_gap(c.value) <= 0.1);
}

TEST_CASE("criterion sides agree on the converged buck i-PIS run", "[!mayfail]") {
  // The buck presets settle in a sliding regime where the duty cycle clamps on
  // almost every step, which breaks the telescoping above.
  const auto c = criterion_over_tail(load_scenario((presets / "buck-ipis.scn").string()), 0.1);
  INFO("saturated steps in the final 10%: " << c.saturated_steps);
  INFO("lagrangian side " << c.value.lagrangian << ", tracking side " << c.value.tracking);
  CHECK(relative_gap(c.value) <= 0.1);
}
