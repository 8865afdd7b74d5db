#pragma once

// Car-following laws used for every vehicle class: the nonlinear optimal
// velocity model (OVM) for human drivers and the constant-time-headway CACC
// law for independent CAVs, plus the OVM equilibrium and its linearization.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mixtraffic {

template <typename Scalar = double>
struct OvmParams {
  Scalar alpha{0.6};  // 1/s, headway-velocity sensitivity
  Scalar beta{0.9};   // 1/s, relative-velocity sensitivity
  Scalar s_min{2};    // m
  Scalar s_max{32};   // m
  Scalar v_max{30};   // m/s

  void validate() const {
    if (!(alpha > 0) || !(beta > 0)) {
      throw std::invalid_argument("OvmParams: alpha and beta must be positive");
    }
    if (!(s_min >= 0) || !(s_min < s_max)) {
      throw std::invalid_argument("OvmParams: require 0 <= s_min < s_max");
    }
    if (!(v_max > 0)) throw std::invalid_argument("OvmParams: v_max must be positive");
  }
};

template <typename Scalar = double>
struct CaccParams {
  Scalar t_h{1.0};   // s
  Scalar s_0{2};     // m
  Scalar k_p{0.45};  // 1/s
  Scalar k_d{0.25};
  Scalar dt{0.1};    // s, controller sampling interval

  /// Common denominator k_d * t_h + dt of the acceleration form.
  Scalar denominator() const { return k_d * t_h + dt; }

  void validate() const {
    if (!(t_h > 0) || !(s_0 >= 0) || !(k_p > 0) || !(k_d > 0) || !(dt > 0)) {
      throw std::invalid_argument("CaccParams: require t_h, k_p, k_d, dt > 0 and s_0 >= 0");
    }
    if (!(denominator() > 0)) throw std::invalid_argument("CaccParams: k_d*t_h + dt must be positive");
  }
};

template <typename Scalar = double>
struct Equilibrium {
  Scalar s_star;
  Scalar v_star;
  Scalar v_prime;  // dV/ds at s_star
};

/// Partial derivatives of the car-following law at equilibrium:
/// dv/dt ~ a1 * s - a2 * v + a3 * v_prev.
template <typename Scalar = double>
struct LinearCoeffs {
  Scalar a1;
  Scalar a2;
  Scalar a3;
};

/// Raised-cosine desired-velocity map V(s).
template <typename Scalar>
Scalar desired_velocity(const OvmParams<Scalar>& p, Scalar s) {
  using std::cos;
  if (s < 0) throw std::invalid_argument("desired_velocity: negative spacing");
  if (s <= p.s_min) return Scalar(0);
  if (s >= p.s_max) return p.v_max;
  const Scalar phase = std::numbers::pi_v<Scalar> * (s - p.s_min) / (p.s_max - p.s_min);
  return p.v_max / 2 * (1 - cos(phase));
}

/// dV/ds; zero outside the interpolation band.
template <typename Scalar>
Scalar desired_velocity_slope(const OvmParams<Scalar>& p, Scalar s) {
  using std::sin;
  if (s <= p.s_min || s >= p.s_max) return Scalar(0);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar width = p.s_max - p.s_min;
  return p.v_max / 2 * pi / width * sin(pi * (s - p.s_min) / width);
}

/// OVM acceleration, unsaturated. `s_dot` is v_prev - v.
template <typename Scalar>
Scalar ovm_accel(const OvmParams<Scalar>& p, Scalar s, Scalar s_dot, Scalar v) {
  return p.alpha * (desired_velocity(p, s) - v) + p.beta * s_dot;
}

/// Uniform-flow operating point at velocity v_star, found by inverting V(s).
template <typename Scalar>
Equilibrium<Scalar> equilibrium_from_velocity(const OvmParams<Scalar>& p, Scalar v_star) {
  using std::acos;
  if (!(v_star > 0) || !(v_star < p.v_max)) {
    throw std::invalid_argument("equilibrium_from_velocity: v_star must lie in (0, v_max) for an interior equilibrium");
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar s_star = p.s_min + (p.s_max - p.s_min) / pi * acos(1 - 2 * v_star / p.v_max);
  return {s_star, v_star, desired_velocity_slope(p, s_star)};
}

template <typename Scalar>
LinearCoeffs<Scalar> linearize(const OvmParams<Scalar>& p, const Equilibrium<Scalar>& eq) {
  return {p.alpha * eq.v_prime, p.alpha + p.beta, p.beta};
}

/// CACC acceleration form, unsaturated.
template <typename Scalar>
Scalar cacc_accel(const CaccParams<Scalar>& p, Scalar s, Scalar v, Scalar v_prev) {
  const Scalar gap_error = s - p.s_0 - p.t_h * v;
  return (p.k_p * gap_error + p.k_d * (v_prev - v)) / p.denominator();
}

}  // namespace mixtraffic
