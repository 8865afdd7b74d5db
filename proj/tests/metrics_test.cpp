#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mixtraffic/metrics.hpp"

namespace mixtraffic {
namespace {

// Trajectory from a table of follower velocities; the head rides at 15 m/s.
Trajectory from_velocities(const std::vector<std::vector<double>>& rows) {
  Trajectory t;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    TrafficState s;
    s.push_back({0.0, 15.0, 0.0});
    for (double v : rows[k]) s.push_back({0.0, v, 0.0});
    t.times.push_back(0.1 * static_cast<double>(k));
    t.snapshots.push_back(std::move(s));
  }
  return t;
}

TEST(Metrics, HandComputedTwoByOne) {
  const auto t = from_velocities({{14.0, 16.0}});
  EXPECT_DOUBLE_EQ(sd(t), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(mad(t), 1.0);
  const auto r = compute_metrics(t);
  EXPECT_DOUBLE_EQ(r.sd, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r.mad, 1.0);
  EXPECT_DOUBLE_EQ(r.sd_normalized, std::sqrt(2.0));
}

TEST(Metrics, NoTimeNormalization) {
  const auto t = from_velocities({{14.0, 16.0}, {14.0, 16.0}, {14.0, 16.0}, {14.0, 16.0}});
  EXPECT_DOUBLE_EQ(sd(t), std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(mad(t), 4.0);
  const auto r = compute_metrics(t);
  EXPECT_DOUBLE_EQ(r.sd_normalized, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r.mad_normalized, 1.0);
}

TEST(Metrics, ConstantVelocityIsZero) {
  const auto t = from_velocities({{12.0, 12.0, 12.0}, {13.0, 13.0, 13.0}});
  EXPECT_EQ(sd(t), 0.0);
  EXPECT_EQ(mad(t), 0.0);
}

TEST(Metrics, HomogeneityAndOffsetInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(15.0, 1.0);
  std::vector<std::vector<double>> rows(50, std::vector<double>(20));
  for (auto& r : rows)
    for (double& v : r) v = noise(rng);
  const auto base = from_velocities(rows);

  auto scaled = rows, shifted = rows;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double mean = 0;
    for (double v : rows[k]) mean += v;
    mean /= static_cast<double>(rows[k].size());
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      scaled[k][i] = mean + 3.0 * (rows[k][i] - mean);
      shifted[k][i] = rows[k][i] + 0.7 * static_cast<double>(k);
    }
  }
  EXPECT_NEAR(sd(from_velocities(scaled)), 3.0 * sd(base), 1e-9);
  EXPECT_NEAR(mad(from_velocities(scaled)), 3.0 * mad(base), 1e-9);
  EXPECT_NEAR(mad(from_velocities(shifted)), mad(base), 1e-9);
  EXPECT_NEAR(sd(from_velocities(shifted)), sd(base), 1e-9);
  EXPECT_GE(sd(base), 0.0);
  EXPECT_GE(mad(base), 0.0);
}

TEST(Metrics, RejectsDegenerateInput) {
  EXPECT_THROW(sd(Trajectory{}), std::invalid_argument);
  EXPECT_THROW(sd(from_velocities({{15.0}})), std::invalid_argument);
  EXPECT_THROW(compute_metrics(from_velocities({{15.0}})), std::invalid_argument);
}

TEST(PeakDeviation, IncludesHead) {
  auto t = from_velocities({{15.0, 15.0}, {13.0, 16.5}});
  t.snapshots[1][0].velocity = 12.0;
  const auto peak = peak_deviation_profile(t, 15.0);
  ASSERT_EQ(peak.size(), 3u);
  EXPECT_DOUBLE_EQ(peak[0], 3.0);
  EXPECT_DOUBLE_EQ(peak[1], 2.0);
  EXPECT_DOUBLE_EQ(peak[2], 1.5);
}

TEST(Metrics, SimulatedRuns) {
  SimConfig c;
  c.n = 20;
  c.t_end = 60;
  const auto perturbed = compute_metrics(run(c));
  EXPECT_GT(perturbed.sd, 0.0);
  EXPECT_GT(perturbed.mad, 0.0);
  EXPECT_NEAR(perturbed.peak_deviation[0], 3.0, 1e-9);
  c.perturbation = false;
  const auto held = compute_metrics(run(c));
  EXPECT_LT(held.sd, 1e-9);
  EXPECT_LT(held.mad, 1e-9);
  for (double v : held.peak_deviation) EXPECT_LT(v, 1e-9);
}

TEST(RangeMean, Basic) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(range_mean(v, 1, 3), 3.0);
  EXPECT_THROW(range_mean(v, 3, 3), std::out_of_range);
  EXPECT_THROW(range_mean(v, 0, 0), std::out_of_range);
}

}  // namespace
}  // namespace mixtraffic
