#include "mixtraffic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mixtraffic {

namespace {

struct DeviationSums {
  double squared = 0;
  double absolute = 0;
};

DeviationSums deviation_sums(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw std::invalid_argument("metrics: empty trajectory");
  DeviationSums sums;
  for (const auto& snap : traj.snapshots) {
    const std::size_t n = snap.size() - 1;
    double mean = 0;
    for (std::size_t i = 1; i <= n; ++i) mean += snap[i].velocity;
    mean /= static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
      const double d = snap[i].velocity - mean;
      sums.squared += d * d;
      sums.absolute += std::abs(d);
    }
  }
  return sums;
}

std::size_t following_count(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw std::invalid_argument("metrics: empty trajectory");
  return traj.snapshots.front().size() - 1;
}

}  // namespace

double sd(const Trajectory& traj) {
  const std::size_t n = following_count(traj);
  if (n < 2) throw std::invalid_argument("sd: need at least 2 vehicles");
  return std::sqrt(deviation_sums(traj).squared / static_cast<double>(n - 1));
}

double mad(const Trajectory& traj) {
  const std::size_t n = following_count(traj);
  if (n < 1) throw std::invalid_argument("mad: need at least 1 vehicle");
  return deviation_sums(traj).absolute / static_cast<double>(n);
}

std::vector<double> peak_deviation_profile(const Trajectory& traj, double v_star) {
  if (traj.snapshots.empty()) throw std::invalid_argument("peak_deviation_profile: empty trajectory");
  std::vector<double> peak(traj.snapshots.front().size(), 0.0);
  for (const auto& snap : traj.snapshots) {
    for (std::size_t i = 0; i < snap.size(); ++i) peak[i] = std::max(peak[i], std::abs(snap[i].velocity - v_star));
  }
  return peak;
}

MetricsReport compute_metrics(const Trajectory& traj) {
  const std::size_t n = following_count(traj);
  if (n < 2) throw std::invalid_argument("compute_metrics: need at least 2 vehicles");
  const DeviationSums sums = deviation_sums(traj);
  const auto steps = static_cast<double>(traj.snapshots.size());
  MetricsReport r;
  r.sd = std::sqrt(sums.squared / static_cast<double>(n - 1));
  r.mad = sums.absolute / static_cast<double>(n);
  r.sd_normalized = std::sqrt(sums.squared / (static_cast<double>(n - 1) * steps));
  r.mad_normalized = sums.absolute / (static_cast<double>(n) * steps);
  r.peak_deviation = peak_deviation_profile(traj, traj.config.params.v_star);
  return r;
}

double range_mean(const std::vector<double>& values, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > values.size()) throw std::out_of_range("range_mean: bad range");
  const auto begin = values.begin() + static_cast<std::ptrdiff_t>(first);
  return std::accumulate(begin, begin + static_cast<std::ptrdiff_t>(count), 0.0) / static_cast<double>(count);
}

}  // namespace mixtraffic
