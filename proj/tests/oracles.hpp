#pragma once

// Independent reference computations used only by the tests. None of these
// route through the library's own transfer-function or LQR code.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>

namespace mixtraffic::oracle {

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

/// |(n1 j w + n0) / (-(w^2) + d1 j w + d0)| written out in real arithmetic.
inline double second_order_mag(double n1, double n0, double d1, double d0, double w) {
  const double num_re = n0, num_im = n1 * w;
  const double den_re = d0 - w * w, den_im = d1 * w;
  return std::sqrt((num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im));
}

/// Steady-state output amplitude of x' = A x + h sin(w t), y = c x, from an
/// RK4 simulation started at rest. Amplitude is taken by projecting y onto
/// sin/cos over one period, repeated until it settles.
inline double time_domain_amplitude(const Eigen::MatrixXd& a, const Eigen::VectorXd& h, const Eigen::RowVectorXd& c,
                                    double w) {
  const double period = 2 * std::numbers::pi / w;
  const int steps = 2000;
  const double dt = period / steps;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.rows());
  auto rhs = [&](const Eigen::VectorXd& s, double t) -> Eigen::VectorXd { return a * s + h * std::sin(w * t); };
  double t = 0;
  double previous = -1;
  const int max_periods = static_cast<int>(std::ceil(4000.0 / period)) + 10;
  for (int p = 0; p < max_periods; ++p) {
    double proj_sin = 0, proj_cos = 0;
    for (int k = 0; k < steps; ++k) {
      const double y = c.dot(x);
      proj_sin += y * std::sin(w * t);
      proj_cos += y * std::cos(w * t);
      const Eigen::VectorXd k1 = rhs(x, t);
      const Eigen::VectorXd k2 = rhs(x + dt / 2 * k1, t + dt / 2);
      const Eigen::VectorXd k3 = rhs(x + dt / 2 * k2, t + dt / 2);
      const Eigen::VectorXd k4 = rhs(x + dt * k3, t + dt);
      x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += dt;
    }
    const double amp = 2.0 / steps * std::hypot(proj_sin, proj_cos);
    if (p > 2 && std::abs(amp - previous) <= 1e-9 * std::max(1.0, amp)) return amp;
    previous = amp;
  }
  return previous;
}

}  // namespace mixtraffic::oracle
