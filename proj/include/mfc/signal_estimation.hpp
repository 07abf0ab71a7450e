#pragma once

// Sliding-window algebraic estimators for the value and first derivative of a
// noisy, uniformly sampled signal.
//
// Over a window of length T with window-local time tau in [0, T]:
//
//   derivative:  -(3!/T^3) * integral_0^T (T - 2 tau) y(tau) dtau
//   value:        (2!/T^2) * integral_0^T (2T - 3 tau) y(tau) dtau
//
// Both are exact for affine signals; the value estimate refers to the window
// start (tau = 0), which is reported as the anchor time.

#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "mfc/error.hpp"

namespace mfc {

struct Sample {
  double time;
  double value;
};

struct EstimatorOutput {
  double value_estimate;
  double derivative_estimate;
  double anchor_time;
};

namespace detail {

// Composite Simpson weights for `intervals` uniform intervals of width h.
// An odd interval count closes with the 3/8 rule on the last three intervals,
// so the rule integrates cubics exactly for any count >= 2.
inline std::vector<double> simpson_weights(std::size_t intervals, double h) {
  std::vector<double> w(intervals + 1, 0.0);
  auto simpson = [&](std::size_t i) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  };
  const std::size_t even_part = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (std::size_t i = 0; i + 2 <= even_part; i += 2) simpson(i);
  if (intervals % 2 == 1) {
    const std::size_t s = intervals - 3;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

inline bool same_spacing(double dt, double h, double t) {
  return std::abs(dt - h) <= 1e-12 * std::max(std::abs(t), h);
}

}  // namespace detail

/// Fixed-duration buffer of uniformly spaced samples.
///
/// Once `capacity_samples()` samples are held the window is full; every later
/// push evicts the oldest sample so the count stays constant.
class SlidingWindow {
 public:
  SlidingWindow(double capacity_duration, double step) : capacity_(capacity_duration), step_(step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw config_error("sliding window: step must be > 0");
    const double ratio = capacity_duration / step;
    const double rounded = std::round(ratio);
    if (!(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, rounded)))
      throw config_error("sliding window: capacity must be a whole number of steps");
    if (rounded < 2.0)
      throw config_error("sliding window: capacity must span at least 2 steps (3 samples)");
    intervals_ = static_cast<std::size_t>(rounded);
    build_weights();
  }

  static SlidingWindow with_samples(std::size_t samples, double step) {
    if (samples < 3) throw config_error("sliding window: at least 3 samples required");
    return SlidingWindow(static_cast<double>(samples - 1) * step, step);
  }

  void push(double t, double y) {
    if (!samples_.empty()) {
      const double last = samples_.back().time;
      if (!(t > last))
        throw Error(Errc::sequencing, "sliding window: sample time " + std::to_string(t) +
                                          " is not after " + std::to_string(last));
      if (!detail::same_spacing(t - last, step_, t))
        throw Error(Errc::spacing, "sliding window: irregular spacing at t = " + std::to_string(t));
    }
    samples_.push_back({t, y});
    if (samples_.size() > capacity_samples()) samples_.pop_front();
  }

  void clear() { samples_.clear(); }

  bool full() const { return samples_.size() == capacity_samples(); }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity_samples() const { return intervals_ + 1; }
  double capacity_duration() const { return capacity_; }
  double step() const { return step_; }
  const std::deque<Sample>& samples() const { return samples_; }

  double oldest_time() const { return samples_.front().time; }
  double newest_time() const { return samples_.back().time; }

  const std::vector<double>& derivative_weights() const { return derivative_weights_; }
  const std::vector<double>& value_weights() const { return value_weights_; }

 private:
  void build_weights() {
    const double T = static_cast<double>(intervals_) * step_;
    const auto q = detail::simpson_weights(intervals_, step_);
    derivative_weights_.resize(q.size());
    value_weights_.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double tau = static_cast<double>(i) * step_;
      derivative_weights_[i] = -(6.0 / (T * T * T)) * (T - 2.0 * tau) * q[i];
      value_weights_[i] = (2.0 / (T * T)) * (2.0 * T - 3.0 * tau) * q[i];
    }
  }

  double capacity_;
  double step_;
  std::size_t intervals_ = 0;
  std::deque<Sample> samples_;
  std::vector<double> derivative_weights_;
  std::vector<double> value_weights_;
};

inline SlidingWindow push_sample(SlidingWindow window, double t, double y) {
  window.push(t, y);
  return window;
}

namespace detail {

inline double apply_weights(const SlidingWindow& w, const std::vector<double>& weights, const char* what) {
  if (!w.full())
    throw Error(Errc::insufficient_data, std::string(what) + ": window holds " +
                                             std::to_string(w.size()) + " of " +
                                             std::to_string(w.capacity_samples()) + " samples");
  double acc = 0.0;
  std::size_t i = 0;
  for (const auto& s : w.samples()) acc += weights[i++] * s.value;
  return acc;
}

}  // namespace detail

inline double estimate_derivative(const SlidingWindow& window) {
  return detail::apply_weights(window, window.derivative_weights(), "estimate_derivative");
}

inline double estimate_value(const SlidingWindow& window) {
  return detail::apply_weights(window, window.value_weights(), "estimate_value");
}

inline EstimatorOutput estimate(const SlidingWindow& window) {
  return {estimate_value(window), estimate_derivative(window), window.oldest_time()};
}

}  // namespace mfc
