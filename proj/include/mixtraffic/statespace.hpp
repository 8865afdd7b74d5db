#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "mixtraffic/models.hpp"
#include "mixtraffic/topology.hpp"

namespace mixtraffic {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Linearized mixed platoon  x' = A x + B u + H v_p,  y = C x.
///
/// The state stacks [spacing deviation, velocity deviation] per vehicle in
/// platoon order, front to back. Under MPF the CAV is the last member, under
/// MSL the first. The disturbance v_p is the velocity deviation of the vehicle
/// immediately ahead of the platoon; the output is the last member's velocity.
template <typename Scalar = double>
struct PlatoonModel {
  MatrixX<Scalar> a_mat;
  VectorX<Scalar> b_vec;
  VectorX<Scalar> h_vec;
  RowVectorX<Scalar> c_vec;
  int m = 0;
  Topology topology = Topology::Mpf;

  /// Index of the CAV within the platoon (0-based).
  int cav_slot() const { return topology == Topology::Mpf ? m - 1 : 0; }
};

template <typename Scalar>
PlatoonModel<Scalar> build_platoon_model(const LinearCoeffs<Scalar>& c, int m, Topology topology) {
  if (m < 2) throw std::invalid_argument("build_platoon_model: platoon size must be at least 2");

  using Block = Eigen::Matrix<Scalar, 2, 2>;
  Block own;       // car-following vehicle, own state
  own << 0, -1, c.a1, -c.a2;
  Block coupling;  // dependence on the predecessor's state
  coupling << 0, 1, 0, c.a3;
  Block integrator;
  integrator << 0, -1, 0, 0;
  Block pure_coupling;
  pure_coupling << 0, 1, 0, 0;

  const int n = 2 * m;
  PlatoonModel<Scalar> model;
  model.m = m;
  model.topology = topology;
  model.a_mat = MatrixX<Scalar>::Zero(n, n);
  model.b_vec = VectorX<Scalar>::Zero(n);
  model.h_vec = VectorX<Scalar>::Zero(n);
  model.c_vec = RowVectorX<Scalar>::Zero(n);

  for (int k = 0; k < m; ++k) {
    model.a_mat.template block<2, 2>(2 * k, 2 * k) = own;
    if (k > 0) model.a_mat.template block<2, 2>(2 * k, 2 * k - 2) = coupling;
  }
  if (topology == Topology::Mpf) {
    // The tail CAV is a double integrator driven only by u.
    model.a_mat.template block<2, 2>(n - 2, n - 2) = integrator;
    model.a_mat.template block<2, 2>(n - 2, n - 4) = pure_coupling;
  }
  model.b_vec(2 * model.cav_slot() + 1) = 1;
  model.h_vec(0) = 1;
  model.h_vec(1) = c.a3;
  model.c_vec(n - 1) = 1;
  return model;
}

}  // namespace mixtraffic
