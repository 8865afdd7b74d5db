#pragma once

// Velocity-dispersion indices over a trajectory. The sums run over every
// recorded step and over following vehicles 1..N (head excluded), measured
// against the instantaneous mean velocity. They are not normalized by the
// number of steps, so values scale with horizon and step size; the
// `*_normalized` variants divide the double sum by the step count.

#include <vector>

#include "mixtraffic/sim.hpp"

namespace mixtraffic {

struct MetricsReport {
  double sd = 0;
  double mad = 0;
  double sd_normalized = 0;
  double mad_normalized = 0;
  std::vector<double> peak_deviation;  // per vehicle id, head included
};

/// sqrt( 1/(N-1) * sum_t sum_i (v_i(t) - mean_v(t))^2 )
double sd(const Trajectory& traj);
/// 1/N * sum_t sum_i |v_i(t) - mean_v(t)|
double mad(const Trajectory& traj);

/// max_t |v_i(t) - v_star| for i = 0..N.
std::vector<double> peak_deviation_profile(const Trajectory& traj, double v_star);

MetricsReport compute_metrics(const Trajectory& traj);

/// Mean of `values[first .. first + count)`.
double range_mean(const std::vector<double>& values, std::size_t first, std::size_t count);

}  // namespace mixtraffic
