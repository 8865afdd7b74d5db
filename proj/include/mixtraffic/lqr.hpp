#pragma once

// Continuous-time LQR synthesis for the linearized platoon models.
//
// The CARE is solved through the stable invariant subspace of the
// Hamiltonian, computed with the scaled matrix-sign iteration, and then
// polished with Newton-Kleinman steps (each one a Lyapunov solve) until the
// residual is at round-off level. The control law is u = -K x, so the closed
// loop is A - B K.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "mixtraffic/errors.hpp"
#include "mixtraffic/statespace.hpp"

namespace mixtraffic {

template <typename Scalar = double>
struct LqrWeights {
  VectorX<Scalar> q_diag;
  Scalar r{1};

  /// Q = q * I, the default being the identity with R = 1.
  static LqrWeights uniform(int n, Scalar q = 1, Scalar r = 1) {
    return {VectorX<Scalar>::Constant(n, q), r};
  }

  void validate(int n) const {
    if (q_diag.size() != n) throw std::invalid_argument("LqrWeights: q_diag length must equal the state dimension");
    if ((q_diag.array() < 0).any() || !(q_diag.array() > 0).any()) {
      throw std::invalid_argument("LqrWeights: q_diag must be non-negative with at least one positive entry");
    }
    if (!(r > 0)) throw std::invalid_argument("LqrWeights: r must be positive");
  }
};

template <typename Scalar = double>
struct RiccatiSolution {
  MatrixX<Scalar> p_mat;
  Scalar residual{};
};

template <typename Scalar = double>
struct Gain {
  RowVectorX<Scalar> k_vec;
};

/// Largest real part over the spectrum of a square matrix.
template <typename Derived>
typename Derived::Scalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::EigenSolver<MatrixX<Scalar>> es(a.eval(), false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_abscissa: eigenvalue computation failed");
  return es.eigenvalues().real().maxCoeff();
}

template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& a) {
  return spectral_abscissa(a) < 0;
}

/// Frobenius norm of A'P + PA - P B R^-1 B' P + Q.
template <typename Scalar>
Scalar care_residual(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, const MatrixX<Scalar>& q, Scalar r,
                     const MatrixX<Scalar>& p) {
  const MatrixX<Scalar> pb = p * b;
  return (a.transpose() * p + p * a - pb * pb.transpose() / r + q).norm();
}

/// Solves A' X + X A = -M for X through the Kronecker-product linear system.
template <typename Scalar>
MatrixX<Scalar> solve_lyapunov(const MatrixX<Scalar>& a, const MatrixX<Scalar>& m) {
  const Eigen::Index n = a.rows();
  const MatrixX<Scalar> at = a.transpose();
  MatrixX<Scalar> kron = MatrixX<Scalar>::Zero(n * n, n * n);
  // vec(A'X) = (I (x) A') vec(X),  vec(XA) = (A' (x) I) vec(X)
  for (Eigen::Index j = 0; j < n; ++j) {
    kron.block(j * n, j * n, n, n) += at;
    for (Eigen::Index i = 0; i < n; ++i) {
      kron.block(j * n, i * n, n, n).diagonal().array() += at(j, i);
    }
  }
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(kron);
  const VectorX<Scalar> rhs = -Eigen::Map<const VectorX<Scalar>>(m.data(), n * n);
  VectorX<Scalar> x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericalError("solve_lyapunov: singular Lyapunov operator");
  MatrixX<Scalar> out = Eigen::Map<MatrixX<Scalar>>(x.data(), n, n);
  return (out + out.transpose()) / 2;
}

namespace detail {

/// Matrix sign function by Newton iteration with determinant scaling.
template <typename Scalar>
MatrixX<Scalar> matrix_sign(MatrixX<Scalar> z) {
  using std::abs;
  using std::exp;
  using std::log;
  const Eigen::Index n = z.rows();
  constexpr int kMaxIter = 100;
  const Scalar tol = 100 * std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::PartialPivLU<MatrixX<Scalar>> lu(z);
    const auto diag = lu.matrixLU().diagonal();
    if ((diag.array() == Scalar(0)).any()) {
      throw SynthesisError("solve_care: Hamiltonian has eigenvalues on the imaginary axis");
    }
    const Scalar log_det = diag.array().abs().log().sum();
    const Scalar scale = exp(-log_det / static_cast<Scalar>(n));
    const MatrixX<Scalar> next = (scale * z + lu.inverse() / scale) / 2;
    const Scalar change = (next - z).norm();
    z = next;
    if (!z.allFinite()) throw SynthesisError("solve_care: sign iteration diverged");
    if (change <= tol * z.norm()) return z;
  }
  throw SynthesisError("solve_care: sign iteration did not converge (pair not stabilizable?)");
}

}  // namespace detail

/// Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0.
///
/// Throws SynthesisError when no stabilizing solution is found within
/// tolerance; the residual of the returned P is at most 1e-8 * max(1, |Q|_F).
template <typename Scalar>
RiccatiSolution<Scalar> solve_care(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, const MatrixX<Scalar>& q,
                                   Scalar r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("solve_care: dimension mismatch");
  }
  if (!(r > 0)) throw std::invalid_argument("solve_care: r must be positive");

  MatrixX<Scalar> ham(2 * n, 2 * n);
  ham << a, -b * b.transpose() / r, -q, -a.transpose();
  const MatrixX<Scalar> w = detail::matrix_sign(ham);

  // The stable subspace [I; P] satisfies (W + I) [I; P] = 0.
  MatrixX<Scalar> lhs(2 * n, n), rhs(2 * n, n);
  lhs << w.topRightCorner(n, n), w.bottomRightCorner(n, n) + MatrixX<Scalar>::Identity(n, n);
  rhs << w.topLeftCorner(n, n) + MatrixX<Scalar>::Identity(n, n), w.bottomLeftCorner(n, n);
  MatrixX<Scalar> p = lhs.colPivHouseholderQr().solve(-rhs);
  p = (p + p.transpose()) / 2;
  if (!p.allFinite()) throw SynthesisError("solve_care: degenerate stable subspace");

  const Scalar tol = Scalar(1e-8) * std::max(Scalar(1), q.norm());
  Scalar residual = care_residual(a, b, q, r, p);
  for (int it = 0; it < 20 && residual > tol * Scalar(1e-3); ++it) {
    const RowVectorX<Scalar> k = b.transpose() * p / r;
    const MatrixX<Scalar> a_cl = a - b * k;
    if (!is_hurwitz(a_cl)) break;
    const MatrixX<Scalar> refined = solve_lyapunov<Scalar>(a_cl, q + r * k.transpose() * k);
    const Scalar refined_residual = care_residual(a, b, q, r, refined);
    if (!(refined_residual < residual)) break;
    p = refined;
    residual = refined_residual;
  }

  if (!(residual <= tol)) {
    throw SynthesisError("solve_care: residual " + std::to_string(static_cast<double>(residual)) +
                         " above tolerance");
  }
  if (!is_hurwitz(MatrixX<Scalar>(a - b * (b.transpose() * p) / r))) {
    throw SynthesisError("solve_care: solution is not stabilizing");
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(p, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -Scalar(1e-9) * std::max(Scalar(1), p.norm())) {
    throw SynthesisError("solve_care: solution is not positive semi-definite");
  }
  return {p, residual};
}

/// K = R^-1 B' P.
template <typename Scalar>
Gain<Scalar> feedback_gain(const RiccatiSolution<Scalar>& sol, const MatrixX<Scalar>& b, Scalar r) {
  if (b.rows() != sol.p_mat.rows()) throw std::invalid_argument("feedback_gain: dimension mismatch");
  if (!(r > 0)) throw std::invalid_argument("feedback_gain: r must be positive");
  return {RowVectorX<Scalar>(b.transpose() * sol.p_mat / r)};
}

/// As above, additionally verifying that A - B K is Hurwitz.
template <typename Scalar>
Gain<Scalar> feedback_gain(const RiccatiSolution<Scalar>& sol, const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                           Scalar r) {
  Gain<Scalar> k = feedback_gain(sol, b, r);
  if (!is_hurwitz(MatrixX<Scalar>(a - b * k.k_vec))) {
    throw SynthesisError("feedback_gain: closed loop is not Hurwitz");
  }
  return k;
}

template <typename Scalar>
MatrixX<Scalar> closed_loop(const PlatoonModel<Scalar>& model, const Gain<Scalar>& k) {
  if (k.k_vec.size() != model.a_mat.cols()) throw std::invalid_argument("closed_loop: gain dimension mismatch");
  return model.a_mat - model.b_vec * k.k_vec;
}

/// Everything derived from one (topology, m) synthesis.
template <typename Scalar = double>
struct PlatoonDesign {
  PlatoonModel<Scalar> model;
  RiccatiSolution<Scalar> riccati;
  Gain<Scalar> gain;
  MatrixX<Scalar> a_cl;
};

template <typename Scalar>
PlatoonDesign<Scalar> synthesize(const PlatoonModel<Scalar>& model, const LqrWeights<Scalar>& weights) {
  weights.validate(static_cast<int>(model.a_mat.rows()));
  const MatrixX<Scalar> q = weights.q_diag.asDiagonal();
  const MatrixX<Scalar> b = model.b_vec;
  PlatoonDesign<Scalar> d{model, solve_care<Scalar>(model.a_mat, b, q, weights.r), {}, {}};
  d.gain = feedback_gain<Scalar>(d.riccati, model.a_mat, b, weights.r);
  d.a_cl = closed_loop(model, d.gain);
  return d;
}

/// Immutable set of platoon designs for sizes 2..m_max under one topology.
/// Weights are Q = q * I and R = r for every size.
template <typename Scalar = double>
class DesignTable {
 public:
  DesignTable(const LinearCoeffs<Scalar>& coeffs, Topology topology, int m_max, Scalar q = 1, Scalar r = 1)
      : topology_(topology), m_max_(m_max) {
    for (int m = 2; m <= m_max; ++m) {
      designs_.emplace(m, synthesize(build_platoon_model(coeffs, m, topology), LqrWeights<Scalar>::uniform(2 * m, q, r)));
    }
  }

  const PlatoonDesign<Scalar>& at(int m) const {
    auto it = designs_.find(m);
    if (it == designs_.end()) throw std::out_of_range("DesignTable: no design for platoon size " + std::to_string(m));
    return it->second;
  }

  Topology topology() const { return topology_; }
  int m_max() const { return m_max_; }

 private:
  Topology topology_;
  int m_max_;
  std::map<int, PlatoonDesign<Scalar>> designs_;
};

}  // namespace mixtraffic
