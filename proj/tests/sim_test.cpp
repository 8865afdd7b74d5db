#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mixtraffic/metrics.hpp"
#include "mixtraffic/sim.hpp"

namespace mixtraffic {
namespace {

SimConfig with_classes(std::string_view classes, Strategy strategy, int m_max) {
  SimConfig c;
  c.composition = composition_from_string(classes);
  c.strategy = strategy;
  c.m_max = m_max;
  return c;
}

TrafficState equilibrium_state(int n, double gap = 17.0, double length = 5.0, double v = 15.0) {
  TrafficState s(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) s[static_cast<std::size_t>(i)] = {-(gap + length) * i, v, 0.0};
  return s;
}

TEST(HeadVelocity, Profile) {
  EXPECT_EQ(head_velocity(5.0, 15.0), 15.0);
  EXPECT_DOUBLE_EQ(head_velocity(11.5, 15.0), 13.5);
  EXPECT_DOUBLE_EQ(head_velocity(13.0, 15.0), 12.0);
  EXPECT_DOUBLE_EQ(head_velocity(14.5, 15.0), 13.5);
  EXPECT_EQ(head_velocity(16.0, 15.0), 15.0);
  EXPECT_EQ(head_velocity(100.0, 15.0), 15.0);
  EXPECT_DOUBLE_EQ(head_velocity(13.0, 15.0, 0.1), 14.7);
  EXPECT_THROW(head_velocity(-1.0, 15.0), std::invalid_argument);
}

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.step_count(), 1500);
  auto bad = [&](auto mutate) {
    SimConfig b;
    mutate(b);
    EXPECT_THROW(b.validate(), std::invalid_argument);
  };
  bad([](SimConfig& b) { b.dt = 0; });
  bad([](SimConfig& b) { b.t_end = 16; });
  bad([](SimConfig& b) { b.n = 1; });
  bad([](SimConfig& b) { b.p = 1.5; });
  bad([](SimConfig& b) { b.m_max = 1; });
  bad([](SimConfig& b) { b.accel_limit = 0; });
}

TEST(Initialize, EquilibriumSpacingAndSpeed) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    SimConfig c;
    c.seed = seed;
    const auto s = initialize(c);
    ASSERT_EQ(s.initial.size(), 101u);
    for (std::size_t i = 1; i < s.initial.size(); ++i) {
      EXPECT_NEAR(s.initial[i - 1].position - s.initial[i].position - c.vehicle_length, 17.0, 1e-9);
      EXPECT_EQ(s.initial[i].velocity, 15.0);
    }
    for (const auto& seg : s.partition.segments) {
      if (seg.kind == SegmentKind::MixedPlatoon) EXPECT_TRUE(s.designs.contains(seg.size()));
    }
  }
}

TEST(Initialize, ZeroPenetrationAndCacc) {
  SimConfig c;
  c.p = 0.0;
  const auto s = initialize(c);
  EXPECT_TRUE(s.designs.empty());
  for (const auto& seg : s.partition.segments) EXPECT_EQ(seg.kind, SegmentKind::IndependentHdv);

  SimConfig cacc;
  cacc.strategy = Strategy::Cacc;
  cacc.p = 0.5;
  const auto sc = initialize(cacc);
  EXPECT_TRUE(sc.designs.empty());
  for (const auto& seg : sc.partition.segments) EXPECT_NE(seg.kind, SegmentKind::MixedPlatoon);
}

TEST(Step, EquilibriumIsFixedPointBeforePerturbation) {
  for (auto strategy : {Strategy::Cacc, Strategy::Mpf, Strategy::Msl}) {
    SimConfig c;
    c.strategy = strategy;
    c.p = 0.4;
    const Simulator sim(c);
    const auto& init = sim.setup().initial;
    const auto acc = sim.accelerations(init, 2.0);
    for (double a : acc) EXPECT_NEAR(a, 0.0, 1e-12);
    const auto next = sim.step(init, 2.0);
    for (std::size_t i = 0; i < next.size(); ++i) {
      EXPECT_NEAR(next[i].velocity, init[i].velocity, 1e-12);
      EXPECT_NEAR(next[i].position, init[i].position + 1.5, 1e-12);
    }
  }
}

TEST(Step, HdvRespondsToDecelerationOnset) {
  const Simulator sim(with_classes("HH", Strategy::Msl, 4));
  auto state = equilibrium_state(2);
  state[0].velocity = head_velocity(10.05, 15.0);
  const auto acc = sim.accelerations(state, 10.05);
  EXPECT_NEAR(acc[1], 0.9 * (state[0].velocity - 15.0), 1e-12);
  EXPECT_LT(acc[1], 0.0);
  EXPECT_NEAR(acc[2], 0.0, 1e-12);
}

TEST(Step, MslCavWithZeroDeviationIsPureOvm) {
  const Simulator sim(with_classes("CH", Strategy::Msl, 2));
  ASSERT_EQ(sim.setup().partition.segments.size(), 1u);
  auto state = equilibrium_state(2);
  state[0].velocity = 16.0;
  const auto acc = sim.accelerations(state, 0.0);
  EXPECT_NEAR(acc[1], 0.9, 1e-12);
}

TEST(Step, MpfCavWithZeroDeviationHoldsSpeed) {
  const Simulator sim(with_classes("HC", Strategy::Mpf, 2));
  auto state = equilibrium_state(2);
  state[0].velocity = 16.0;
  const auto acc = sim.accelerations(state, 0.0);
  EXPECT_NEAR(acc[1], 0.9, 1e-12);  // the HDV reacts
  EXPECT_EQ(acc[2], 0.0);           // the tail CAV sees x = 0
}

TEST(Step, CaccIndependentUsesHeadwayLaw) {
  const Simulator sim(with_classes("CC", Strategy::Cacc, 4));
  auto state = equilibrium_state(2);
  state[0].position += 1.0;
  const auto acc = sim.accelerations(state, 0.0);
  EXPECT_NEAR(acc[1], 0.45 / 0.35, 1e-12);
}

TEST(Run, FixedPointWithoutPerturbation) {
  for (auto strategy : {Strategy::Cacc, Strategy::Mpf, Strategy::Msl}) {
    SimConfig c;
    c.strategy = strategy;
    c.p = 0.3;
    c.perturbation = false;
    const auto traj = run(c);
    double worst = 0;
    for (const auto& snap : traj.snapshots)
      for (const auto& v : snap) worst = std::max(worst, std::abs(v.velocity - 15.0));
    EXPECT_LE(worst, 1e-9) << to_string(strategy);
  }
}

TEST(Run, RecordsInclusiveUniformGrid) {
  const auto traj = run(SimConfig{});
  ASSERT_EQ(traj.snapshots.size(), 1501u);
  ASSERT_EQ(traj.times.size(), 1501u);
  for (std::size_t k = 0; k < traj.times.size(); ++k) EXPECT_NEAR(traj.times[k], 0.1 * static_cast<double>(k), 1e-9);
  EXPECT_EQ(traj.snapshots.front().size(), 101u);
}

TEST(Run, Deterministic) {
  SimConfig c;
  c.strategy = Strategy::Mpf;
  c.p = 0.3;
  c.seed = 42;
  const auto a = run(c), b = run(c);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) ASSERT_EQ(a.snapshots[k], b.snapshots[k]);
  EXPECT_EQ(a.composition.classes, b.composition.classes);
}

TEST(Run, AccelerationSaturated) {
  for (auto strategy : {Strategy::Cacc, Strategy::Mpf, Strategy::Msl}) {
    SimConfig c;
    c.strategy = strategy;
    c.p = 0.3;
    c.perturbation_accel = 1.5;
    const auto traj = run(c);
    double worst = 0;
    for (const auto& snap : traj.snapshots)
      for (std::size_t i = 1; i < snap.size(); ++i) worst = std::max(worst, std::abs(snap[i].acceleration));
    EXPECT_LE(worst, c.accel_limit);
  }
}

TEST(Run, HeadPeakDeviationIsThree) {
  const auto traj = run(SimConfig{});
  const auto peak = peak_deviation_profile(traj, 15.0);
  EXPECT_NEAR(peak[0], 3.0, 1e-9);
}

TEST(Run, PureHumanTrafficAmplifiesUpstream) {
  SimConfig c;
  c.p = 0.0;
  const auto peak = peak_deviation_profile(run(c), 15.0);
  EXPECT_GT(peak[100], peak[10]);
}

TEST(Run, MslRunRecoversEquilibrium) {
  SimConfig c;  // MSL, p = 0.2, M = 6
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    c.seed = seed;
    const auto traj = run(c);
    for (const auto& v : traj.snapshots.back()) EXPECT_NEAR(v.velocity, 15.0, 0.01);
  }
}

// The integrator is first order: successive halvings of dt roughly halve the
// change in SD, and below 0.025 s a halving moves SD by under 1%.
TEST(Run, StepRefinementConvergesAtFirstOrder) {
  SimConfig c;
  std::vector<double> sds;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    c.dt = dt;
    sds.push_back(compute_metrics(run(c)).sd_normalized);
  }
  const double d1 = sds[1] - sds[0], d2 = sds[2] - sds[1], d3 = sds[3] - sds[2];
  EXPECT_NEAR(d1 / d2, 2.0, 0.4);
  EXPECT_NEAR(d2 / d3, 2.0, 0.4);
  EXPECT_LT(std::abs(d3) / sds[3], 0.01);
}

TEST(Run, CollisionCarriesPartialTrajectory) {
  SimConfig c = with_classes("HH", Strategy::Msl, 4);
  c.accel_limit = 0.01;
  c.perturbation_accel = 2.0;
  try {
    run(c);
    FAIL() << "expected a collision";
  } catch (const CollisionError& e) {
    EXPECT_EQ(e.vehicle_id(), 1);
    EXPECT_GT(e.time(), 10.0);
    ASSERT_TRUE(e.partial());
    ASSERT_FALSE(e.partial()->snapshots.empty());
    EXPECT_LT(e.partial()->times.back(), e.time());
    EXPECT_NEAR(e.partial()->times.back() + c.dt, e.time(), 1e-9);
  }
}

// Linearized closed loop x' = A_cl x + H v_p(t), integrated with RK4 on a fine
// step, against the nonlinear simulator for a single small-signal platoon.
std::vector<double> linear_peaks(const PlatoonDesign<double>& d, double accel, double t_end) {
  const double h = 0.001;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d.a_cl.rows());
  auto rhs = [&](const Eigen::VectorXd& s, double t) -> Eigen::VectorXd {
    return d.a_cl * s + d.model.h_vec * (head_velocity(t, 15.0, accel) - 15.0);
  };
  std::vector<double> peaks(static_cast<std::size_t>(d.model.m), 0.0);
  const auto steps = static_cast<int>(std::llround(t_end / h));
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Eigen::VectorXd k1 = rhs(x, t), k2 = rhs(x + h / 2 * k1, t + h / 2), k3 = rhs(x + h / 2 * k2, t + h / 2),
                          k4 = rhs(x + h * k3, t + h);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    for (int i = 0; i < d.model.m; ++i) peaks[static_cast<std::size_t>(i)] = std::max(peaks[static_cast<std::size_t>(i)], std::abs(x(2 * i + 1)));
  }
  return peaks;
}

TEST(Run, SmallSignalMatchesLinearizedPlatoon) {
  for (auto [classes, strategy] : {std::pair{"HHHC", Strategy::Mpf}, std::pair{"CHHH", Strategy::Msl}}) {
    SimConfig c = with_classes(classes, strategy, 4);
    c.perturbation_accel = 0.1;
    c.t_end = 60;
    const Simulator sim(c);
    ASSERT_EQ(sim.setup().designs.size(), 1u);
    const auto traj = sim.run();
    const auto nonlinear = peak_deviation_profile(traj, 15.0);
    const auto linear = linear_peaks(sim.setup().designs.at(4), 0.1, 60);
    for (int i = 0; i < 4; ++i) {
      const double lin = linear[static_cast<std::size_t>(i)];
      EXPECT_LT(std::abs(nonlinear[static_cast<std::size_t>(i + 1)] - lin) / lin, 0.02)
          << classes << " vehicle " << i + 1;
    }
  }
}

}  // namespace
}  // namespace mixtraffic
