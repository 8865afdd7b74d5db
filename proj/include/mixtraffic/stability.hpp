#pragma once

// Probabilistic string-stability criterion for mixed traffic.
//
// The response of N vehicles is modelled as the product of per-segment
// transfer functions, each raised to N times the probability of its segment
// type. Everything is accumulated in the log domain:
//   L(w) = N * sum_k p_k * log|G_k(jw)|,
// and traffic is string stable iff L(w) <= 0 over the whole grid.

#include <map>
#include <optional>
#include <vector>

#include "mixtraffic/composition.hpp"
#include "mixtraffic/frequency.hpp"
#include "mixtraffic/lqr.hpp"
#include "mixtraffic/params.hpp"
#include "mixtraffic/topology.hpp"

namespace mixtraffic {

inline constexpr double kStabilityTolerance = 1e-9;
inline constexpr double kMagnitudeFloor = 1e-300;

/// Magnitudes of every segment type at one frequency.
struct SegmentMagnitudes {
  double hdv = 1;
  double cav = 1;
  std::map<int, double> platoon;  // keyed by platoon size m
};

double mixed_traffic_log_magnitude(const SegmentMagnitudes& mags, const SegmentProbabilities& probs, int n);

struct Scenario {
  Strategy strategy = Strategy::Msl;
  double p = 0.0;
  int m_max = 4;
  int n = 1000;
  ModelParams params;
};

struct StabilityReport {
  std::vector<double> omegas;
  std::vector<double> log_magnitude;
  std::vector<SegmentMagnitudes> magnitudes;
  SegmentProbabilities probabilities;
  double peak = 0;
  double argmax_omega = 0;
  bool stable = false;
  double tolerance = kStabilityTolerance;
};

/// Per-segment frequency responses for one strategy and MPS over a grid.
/// These do not depend on the penetration rate, so one table serves every p.
class SegmentResponse {
 public:
  SegmentResponse(const ModelParams& params, Strategy strategy, int m_max, FrequencyGrid grid);

  StabilityReport evaluate(double p, int n) const;

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<SegmentMagnitudes>& magnitudes() const { return mags_; }
  Strategy strategy() const { return strategy_; }
  int m_max() const { return m_max_; }
  /// Closed-loop designs, empty for CACC.
  const std::optional<DesignTable<double>>& designs() const { return designs_; }

 private:
  Strategy strategy_;
  int m_max_;
  FrequencyGrid grid_;
  std::optional<DesignTable<double>> designs_;
  std::vector<SegmentMagnitudes> mags_;
};

/// Default analysis grid: 2000 log-spaced points on [1e-2, 1e2] rad/s.
FrequencyGrid default_grid();

StabilityReport string_stability(const Scenario& scenario, const FrequencyGrid& grid);

/// Smallest p in {step, 2 step, ..., 1} with a stable verdict. Empty when
/// traffic is unstable even at p = 1.
std::optional<double> critical_penetration(const SegmentResponse& response, int n, double step = 0.1);

/// As above for a whole scenario; `scenario.p` is ignored.
std::optional<double> find_critical_penetration(const Scenario& scenario, const FrequencyGrid& grid,
                                                double step = 0.1);

}  // namespace mixtraffic
