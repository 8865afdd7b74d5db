#pragma once

#include "mixtraffic/models.hpp"

namespace mixtraffic {

/// Model parameters shared by the frequency analysis and the simulator.
/// Defaults reproduce the calibrated setup (OVM alpha 0.6, beta 0.9, spacing
/// band 2..32 m, v_max 30 m/s; CACC t_h 1 s, s_0 2 m, k_p 0.45, k_d 0.25,
/// dt 0.1 s; Q = I, R = 1; equilibrium at 15 m/s).
struct ModelParams {
  OvmParams<double> ovm;
  CaccParams<double> cacc;
  double v_star = 15.0;
  double lqr_q = 1.0;
  double lqr_r = 1.0;

  void validate() const {
    ovm.validate();
    cacc.validate();
    if (!(lqr_q > 0) || !(lqr_r > 0)) throw std::invalid_argument("ModelParams: LQR weights must be positive");
  }

  Equilibrium<double> equilibrium() const { return equilibrium_from_velocity(ovm, v_star); }
  LinearCoeffs<double> coeffs() const { return linearize(ovm, equilibrium()); }
};

}  // namespace mixtraffic
