#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfc/error.hpp"
#include "mfc/integrators.hpp"

namespace mfc {

/// Rational transfer function, coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> numerator;
  std::vector<double> denominator;
};

/// SISO state-space model in controllable canonical form.
struct StateSpacePlant {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;
  Eigen::VectorXd state;

  std::size_t order() const { return static_cast<std::size_t>(state.size()); }
};

namespace detail {

inline std::vector<double> strip_leading_zeros(const std::vector<double>& c) {
  std::size_t i = 0;
  while (i + 1 < c.size() && c[i] == 0.0) ++i;
  return {c.begin() + static_cast<std::ptrdiff_t>(i), c.end()};
}

}  // namespace detail

inline void check_proper(const TransferFunction& tf) {
  if (tf.denominator.empty() || tf.numerator.empty())
    throw Error(Errc::realization, "transfer function: empty coefficient list");
  if (tf.denominator.front() == 0.0)
    throw Error(Errc::realization, "transfer function: leading denominator coefficient is zero");
  const auto num = detail::strip_leading_zeros(tf.numerator);
  if (num.size() > tf.denominator.size())
    throw Error(Errc::realization, "transfer function is improper (numerator degree " +
                                       std::to_string(num.size() - 1) + " > denominator degree " +
                                       std::to_string(tf.denominator.size() - 1) + ")");
}

inline StateSpacePlant realize(const TransferFunction& tf) {
  check_proper(tf);
  const double a0 = tf.denominator.front();
  const std::size_t n = tf.denominator.size() - 1;

  std::vector<double> a(n + 1), b(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) a[i] = tf.denominator[i] / a0;
  const auto num = detail::strip_leading_zeros(tf.numerator);
  const std::size_t offset = n + 1 - num.size();
  for (std::size_t i = 0; i < num.size(); ++i) b[offset + i] = num[i] / a0;

  StateSpacePlant p;
  const auto N = static_cast<Eigen::Index>(n);
  p.A = Eigen::MatrixXd::Zero(N, N);
  p.B = Eigen::VectorXd::Zero(N);
  p.C = Eigen::RowVectorXd::Zero(N);
  p.D = b[0];
  p.state = Eigen::VectorXd::Zero(N);
  if (n == 0) return p;

  for (Eigen::Index i = 0; i + 1 < N; ++i) p.A(i, i + 1) = 1.0;
  // x1 is the lowest phase variable: last row holds -a_n ... -a_1.
  for (std::size_t j = 0; j < n; ++j) p.A(N - 1, static_cast<Eigen::Index>(j)) = -a[n - j];
  p.B(N - 1) = 1.0;
  for (std::size_t j = 0; j < n; ++j) p.C(static_cast<Eigen::Index>(j)) = b[n - j] - p.D * a[n - j];
  return p;
}

inline double dc_gain(const TransferFunction& tf) {
  if (tf.denominator.empty() || tf.numerator.empty())
    throw config_error("dc_gain: empty coefficient list");
  const double den0 = tf.denominator.back();
  if (den0 == 0.0) throw Error(Errc::pole_at_origin, "dc_gain: pole at the origin");
  return tf.numerator.back() / den0;
}

inline double lti_output(const StateSpacePlant& p, double u) { return p.C.dot(p.state) + p.D * u; }

/// Output derivative with input `u` held: C (A x + B u).
inline double lti_output_derivative(const StateSpacePlant& p, double u) {
  if (p.order() == 0) return 0.0;
  return p.C.dot(p.A * p.state + p.B * u);
}

/// Advance by one RK4 step with `u` held; returns C x + D u at the new time.
inline double step_lti(StateSpacePlant& p, double u, double h) {
  if (p.order() > 0) {
    auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return p.A * x + p.B * u; };
    p.state = rk4_step(f, p.state, h);
  }
  return lti_output(p, u);
}

}  // namespace mfc
