#include "mixtraffic/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixtraffic {

namespace {

constexpr double kPerturbationStart = 10.0;
constexpr double kPerturbationTurn = 13.0;
constexpr double kPerturbationEnd = 16.0;

std::string collision_message(double t, int id) {
  std::ostringstream os;
  os << "collision: vehicle " << id << " reached a non-positive gap at t=" << t << " s";
  return os.str();
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  if (composition) {
    if (composition->size() < 2) throw std::invalid_argument("SimConfig: need at least 2 vehicles");
  } else {
    if (n < 2) throw std::invalid_argument("SimConfig: n must be at least 2");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SimConfig: p must lie in [0, 1]");
  }
  if (m_max < 2) throw std::invalid_argument("SimConfig: m_max must be at least 2");
  if (!(dt > 0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(t_end > kPerturbationEnd)) throw std::invalid_argument("SimConfig: t_end must exceed the 16 s perturbation");
  if (!(accel_limit > 0)) throw std::invalid_argument("SimConfig: accel_limit must be positive");
  if (!(vehicle_length >= 0)) throw std::invalid_argument("SimConfig: vehicle_length must be non-negative");
  if (!(perturbation_accel >= 0)) throw std::invalid_argument("SimConfig: perturbation_accel must be non-negative");
}

int SimConfig::step_count() const { return static_cast<int>(std::llround(t_end / dt)); }

double head_velocity(double t, double v_star, double accel) {
  if (t < 0) throw std::invalid_argument("head_velocity: negative time");
  if (t <= kPerturbationStart || t >= kPerturbationEnd) return v_star;
  if (t <= kPerturbationTurn) return v_star - accel * (t - kPerturbationStart);
  return v_star + accel * (t - kPerturbationEnd);
}

CollisionError::CollisionError(double time, int vehicle_id, std::shared_ptr<const Trajectory> partial)
    : std::runtime_error(collision_message(time, vehicle_id)),
      time_(time),
      vehicle_id_(vehicle_id),
      partial_(std::move(partial)) {}

SimSetup initialize(const SimConfig& config) {
  config.validate();
  SimSetup s;
  s.composition = config.composition ? *config.composition : sample_composition(config.n, config.p, config.seed);
  s.partition = partition(s.composition, config.strategy, config.m_max);
  s.equilibrium = config.params.equilibrium();

  if (auto topo = platoon_topology(config.strategy)) {
    const LinearCoeffs<double> coeffs = config.params.coeffs();
    for (const auto& seg : s.partition.segments) {
      if (seg.kind != SegmentKind::MixedPlatoon || s.designs.contains(seg.size())) continue;
      const int m = seg.size();
      s.designs.emplace(m, synthesize(build_platoon_model(coeffs, m, *topo),
                                      LqrWeights<double>::uniform(2 * m, config.params.lqr_q, config.params.lqr_r)));
    }
  }

  const int n = s.composition.size();
  const double pitch = s.equilibrium.s_star + config.vehicle_length;
  s.initial.resize(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    s.initial[static_cast<std::size_t>(i)] = {-pitch * i, s.equilibrium.v_star, 0.0};
  }
  return s;
}

Simulator::Simulator(SimConfig config) : config_(std::move(config)), setup_(initialize(config_)) {
  controllers_.resize(static_cast<std::size_t>(setup_.composition.size() + 1));
  for (const auto& seg : setup_.partition.segments) {
    for (int id : seg.members) {
      auto& c = controllers_[static_cast<std::size_t>(id)];
      c.law = setup_.composition.of(id) == VehicleClass::Hdv ? Law::Hdv : Law::Cacc;
    }
    if (seg.kind == SegmentKind::MixedPlatoon) {
      const auto topo = *platoon_topology(config_.strategy);
      const int cav = topo == Topology::Mpf ? seg.members.back() : seg.members.front();
      auto& c = controllers_[static_cast<std::size_t>(cav)];
      c.law = Law::PlatoonCav;
      c.design = &setup_.designs.at(seg.size());
      c.members = seg.members;
    }
  }
}

double Simulator::head_speed(double t) const {
  const double v_star = setup_.equilibrium.v_star;
  return config_.perturbation ? head_velocity(t, v_star, config_.perturbation_accel) : v_star;
}

std::vector<double> Simulator::accelerations(const TrafficState& state, double t) const {
  const auto n = state.size();
  const double s_star = setup_.equilibrium.s_star;
  const double v_star = setup_.equilibrium.v_star;
  const auto& ovm = config_.params.ovm;
  auto gap = [&](std::size_t i) { return state[i - 1].position - state[i].position - config_.vehicle_length; };

  std::vector<double> acc(n, 0.0);
  acc[0] = (head_speed(t + config_.dt) - head_speed(t)) / config_.dt;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& c = controllers_[i];
    const double s = std::max(gap(i), 0.0);
    const double v = state[i].velocity;
    const double v_prev = state[i - 1].velocity;
    double a = 0.0;
    switch (c.law) {
      case Law::Hdv:
        a = ovm_accel(ovm, s, v_prev - v, v);
        break;
      case Law::Cacc:
        a = cacc_accel(config_.params.cacc, s, v, v_prev);
        break;
      case Law::PlatoonCav: {
        VectorX<double> x(2 * static_cast<Eigen::Index>(c.members.size()));
        for (std::size_t k = 0; k < c.members.size(); ++k) {
          const auto id = static_cast<std::size_t>(c.members[k]);
          x(static_cast<Eigen::Index>(2 * k)) = gap(id) - s_star;
          x(static_cast<Eigen::Index>(2 * k + 1)) = state[id].velocity - v_star;
        }
        const double u = -c.design->gain.k_vec.dot(x);
        a = c.design->model.topology == Topology::Mpf ? u : ovm_accel(ovm, s, v_prev - v, v) + u;
        break;
      }
    }
    acc[i] = std::clamp(a, -config_.accel_limit, config_.accel_limit);
  }
  return acc;
}

TrafficState Simulator::step(const TrafficState& state, double t) const {
  return advance(state, accelerations(state, t), t);
}

TrafficState Simulator::advance(const TrafficState& state, const std::vector<double>& acc, double t) const {
  const double dt = config_.dt;
  TrafficState next(state.size());
  next[0].velocity = head_speed(t + dt);
  for (std::size_t i = 1; i < state.size(); ++i) {
    next[i].velocity = std::max(state[i].velocity + acc[i] * dt, 0.0);
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    next[i].position = state[i].position + next[i].velocity * dt;
  }
  for (std::size_t i = 1; i < state.size(); ++i) {
    if (next[i - 1].position - next[i].position - config_.vehicle_length <= 0.0) {
      throw CollisionError(t + dt, static_cast<int>(i));
    }
  }
  return next;
}

Trajectory Simulator::run() const {
  Trajectory traj;
  traj.config = config_;
  traj.composition = setup_.composition;
  traj.partition = setup_.partition;
  const int steps = config_.step_count();
  traj.times.reserve(static_cast<std::size_t>(steps + 1));
  traj.snapshots.reserve(static_cast<std::size_t>(steps + 1));

  TrafficState state = setup_.initial;
  for (int k = 0;; ++k) {
    const double t = k * config_.dt;
    const std::vector<double> acc = accelerations(state, t);
    for (std::size_t i = 0; i < state.size(); ++i) state[i].acceleration = acc[i];
    traj.times.push_back(t);
    traj.snapshots.push_back(state);
    if (k == steps) break;
    try {
      state = advance(state, acc, t);
    } catch (const CollisionError& e) {
      throw CollisionError(e.time(), e.vehicle_id(), std::make_shared<const Trajectory>(std::move(traj)));
    }
  }
  return traj;
}

Trajectory run(const SimConfig& config) { return Simulator(config).run(); }

}  // namespace mixtraffic
