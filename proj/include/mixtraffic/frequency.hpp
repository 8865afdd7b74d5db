#pragma once

// Transfer-function magnitudes on the imaginary axis for the three kinds of
// traffic segment.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mixtraffic/errors.hpp"
#include "mixtraffic/models.hpp"
#include "mixtraffic/statespace.hpp"

namespace mixtraffic {

struct FrequencyGrid {
  std::vector<double> omegas;  // rad/s, strictly increasing, positive

  /// `count` log-spaced points on [lo, hi], endpoints included.
  static FrequencyGrid log_spaced(double lo, double hi, int count) {
    if (!(lo > 0) || !(hi > lo) || count < 2) {
      throw std::invalid_argument("FrequencyGrid: require 0 < lo < hi and count >= 2");
    }
    FrequencyGrid g;
    g.omegas.resize(static_cast<std::size_t>(count));
    const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
    for (int i = 0; i < count; ++i) g.omegas[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + i * step);
    g.omegas.back() = hi;
    return g;
  }
};

/// |(a3 s + a1) / (s^2 + a2 s + a1)| at s = j omega.
template <typename Scalar>
Scalar hdv_transfer_mag(const LinearCoeffs<Scalar>& c, Scalar omega) {
  const std::complex<Scalar> s(0, omega);
  return std::abs((c.a3 * s + c.a1) / (s * s + c.a2 * s + c.a1));
}

/// Closed-form CACC follower response, same second-order shape as the HDV one
/// with coefficients grouped over k_d t_h + dt.
template <typename Scalar>
Scalar cav_transfer_mag(const CaccParams<Scalar>& p, Scalar omega) {
  const Scalar den = p.denominator();
  const Scalar kd = p.k_d / den;
  const Scalar kp = p.k_p / den;
  const Scalar kpth = p.k_p * p.t_h / den;
  const std::complex<Scalar> s(0, omega);
  return std::abs((kd * s + kp) / (s * s + (kd + kpth) * s + kp));
}

/// |c (j omega I - A_cl)^-1 h| via an LU solve.
template <typename Scalar>
Scalar platoon_transfer_mag(const MatrixX<Scalar>& a_cl, const VectorX<Scalar>& h, const RowVectorX<Scalar>& c,
                            Scalar omega) {
  using Complex = std::complex<Scalar>;
  using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  CMatrix shifted = -a_cl.template cast<Complex>();
  shifted.diagonal().array() += Complex(0, omega);
  Eigen::FullPivLU<CMatrix> lu(shifted);
  if (!lu.isInvertible()) throw NumericalError("platoon_transfer_mag: j*omega*I - A_cl is singular");
  const Eigen::Matrix<Complex, Eigen::Dynamic, 1> x = lu.solve(h.template cast<Complex>());
  return std::abs((c.template cast<Complex>() * x)(0, 0));
}

}  // namespace mixtraffic
