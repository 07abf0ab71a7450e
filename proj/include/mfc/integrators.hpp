#pragma once

namespace mfc {

/// One classical fourth-order Runge-Kutta step of x' = f(x).
///
/// `State` only needs vector-space arithmetic (x + y, scalar * x); the input
/// is held constant across the step (zero-order hold), so it lives in `f`.
template <class State, class F>
State rk4_step(F&& f, const State& x, double h) {
  const State k1 = f(x);
  const State k2 = f(State(x + (0.5 * h) * k1));
  const State k3 = f(State(x + (0.5 * h) * k2));
  const State k4 = f(State(x + h * k3));
  return State(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace mfc
