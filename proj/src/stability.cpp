#include "mixtraffic/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixtraffic {

namespace {

double safe_log(double mag) { return std::log(std::max(mag, kMagnitudeFloor)); }

}  // namespace

double mixed_traffic_log_magnitude(const SegmentMagnitudes& mags, const SegmentProbabilities& probs, int n) {
  double acc = probs.p_cav * safe_log(mags.cav) + probs.p_hdv * safe_log(mags.hdv);
  // Skip zero weights so that an unused segment type never needs a magnitude.
  if (probs.p_size_max != 0.0) acc += probs.p_size_max * safe_log(mags.platoon.at(probs.m_max));
  for (const auto& [m, weight] : probs.p_size) {
    if (weight != 0.0) acc += weight * safe_log(mags.platoon.at(m));
  }
  return n * acc;
}

SegmentResponse::SegmentResponse(const ModelParams& params, Strategy strategy, int m_max, FrequencyGrid grid)
    : strategy_(strategy), m_max_(m_max), grid_(std::move(grid)) {
  if (m_max < 2) throw std::invalid_argument("SegmentResponse: m_max must be at least 2");
  params.validate();
  const LinearCoeffs<double> coeffs = params.coeffs();
  if (auto topo = platoon_topology(strategy)) {
    designs_.emplace(coeffs, *topo, m_max, params.lqr_q, params.lqr_r);
  }
  mags_.reserve(grid_.omegas.size());
  for (double w : grid_.omegas) {
    SegmentMagnitudes s;
    s.hdv = hdv_transfer_mag(coeffs, w);
    s.cav = cav_transfer_mag(params.cacc, w);
    for (int m = 2; m <= m_max; ++m) {
      if (designs_) {
        const auto& d = designs_->at(m);
        s.platoon[m] = platoon_transfer_mag(d.a_cl, d.model.h_vec, d.model.c_vec, w);
      } else {
        // No cooperative control: members respond in series.
        s.platoon[m] = s.cav * std::pow(s.hdv, m - 1);
      }
    }
    mags_.push_back(std::move(s));
  }
}

StabilityReport SegmentResponse::evaluate(double p, int n) const {
  if (n < 1) throw std::invalid_argument("SegmentResponse::evaluate: n must be positive");
  StabilityReport r;
  r.omegas = grid_.omegas;
  r.magnitudes = mags_;
  r.probabilities = segment_probabilities(p, m_max_);
  r.log_magnitude.reserve(mags_.size());
  r.peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mags_.size(); ++i) {
    const double l = mixed_traffic_log_magnitude(mags_[i], r.probabilities, n);
    r.log_magnitude.push_back(l);
    if (l > r.peak) {
      r.peak = l;
      r.argmax_omega = grid_.omegas[i];
    }
  }
  r.stable = r.peak <= r.tolerance;
  return r;
}

FrequencyGrid default_grid() { return FrequencyGrid::log_spaced(1e-2, 1e2, 2000); }

StabilityReport string_stability(const Scenario& scenario, const FrequencyGrid& grid) {
  return SegmentResponse(scenario.params, scenario.strategy, scenario.m_max, grid).evaluate(scenario.p, scenario.n);
}

std::optional<double> find_critical_penetration(const Scenario& scenario, const FrequencyGrid& grid, double step) {
  return critical_penetration(SegmentResponse(scenario.params, scenario.strategy, scenario.m_max, grid), scenario.n,
                              step);
}

std::optional<double> critical_penetration(const SegmentResponse& response, int n, double step) {
  if (!(step > 0)) throw std::invalid_argument("critical_penetration: step must be positive");
  const auto count = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 1; k <= count; ++k) {
    const double p = std::min(1.0, std::round(k * step * 1e12) / 1e12);
    if (response.evaluate(p, n).stable) return p;
  }
  return std::nullopt;
}

}  // namespace mixtraffic
