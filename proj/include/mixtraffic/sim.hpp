#pragma once

// Nonlinear single-lane simulation of N vehicles behind a head vehicle that
// performs a decelerate/accelerate manoeuvre.
//
// HDVs follow the nonlinear OVM, independent CAVs the CACC law, MPF platoon
// CAVs apply u = -K x and MSL platoon CAVs apply OVM + u. Accelerations are
// clipped to +-accel_limit and speeds floored at zero. Integration is
// semi-implicit Euler: velocity first, then position with the new velocity.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtraffic/composition.hpp"
#include "mixtraffic/lqr.hpp"
#include "mixtraffic/params.hpp"
#include "mixtraffic/topology.hpp"

namespace mixtraffic {

struct SimConfig {
  int n = 100;
  double p = 0.2;
  int m_max = 6;
  Strategy strategy = Strategy::Msl;
  std::uint64_t seed = 1;
  double dt = 0.1;
  double t_end = 150.0;
  double accel_limit = 2.0;
  double vehicle_length = 5.0;
  bool perturbation = true;
  double perturbation_accel = 1.0;  // m/s^2, ramp rate of the head manoeuvre
  ModelParams params;
  /// Fixed vehicle classes; when set, `n`, `p` and `seed` do not drive sampling.
  std::optional<TrafficComposition> composition;

  void validate() const;
  int step_count() const;
};

/// Head-vehicle velocity: v* until 10 s, ramp down at `accel` until 13 s,
/// back up until 16 s, then v*.
double head_velocity(double t, double v_star, double accel = 1.0);

struct VehicleState {
  double position = 0;
  double velocity = 0;
  double acceleration = 0;
  bool operator==(const VehicleState&) const = default;
};

/// Snapshot of all vehicles; index 0 is the head vehicle.
using TrafficState = std::vector<VehicleState>;

struct Trajectory {
  SimConfig config;
  TrafficComposition composition;
  PlatoonPartition partition;
  std::vector<double> times;
  std::vector<TrafficState> snapshots;

  /// Following vehicles, head excluded.
  int vehicle_count() const { return composition.size(); }
  std::size_t step_count() const { return snapshots.size(); }
};

class CollisionError : public std::runtime_error {
 public:
  CollisionError(double time, int vehicle_id, std::shared_ptr<const Trajectory> partial = nullptr);

  double time() const { return time_; }
  int vehicle_id() const { return vehicle_id_; }
  /// Trajectory up to and including the last collision-free snapshot.
  const std::shared_ptr<const Trajectory>& partial() const { return partial_; }

 private:
  double time_;
  int vehicle_id_;
  std::shared_ptr<const Trajectory> partial_;
};

/// Everything fixed before the first step.
struct SimSetup {
  TrafficComposition composition;
  PlatoonPartition partition;
  Equilibrium<double> equilibrium;
  std::map<int, PlatoonDesign<double>> designs;  // one per occurring platoon size
  TrafficState initial;
};

SimSetup initialize(const SimConfig& config);

class Simulator {
 public:
  explicit Simulator(SimConfig config);
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const SimConfig& config() const { return config_; }
  const SimSetup& setup() const { return setup_; }

  /// Saturated accelerations of vehicles 1..N at time t; entry 0 is the head's.
  std::vector<double> accelerations(const TrafficState& state, double t) const;

  /// Advances one step from time t. Throws CollisionError on a non-positive gap.
  TrafficState step(const TrafficState& state, double t) const;

  Trajectory run() const;

 private:
  enum class Law { Hdv, Cacc, PlatoonCav };
  struct Controller {
    Law law = Law::Hdv;
    const PlatoonDesign<double>* design = nullptr;
    std::vector<int> members;
  };

  double head_speed(double t) const;
  TrafficState advance(const TrafficState& state, const std::vector<double>& acc, double t) const;

  SimConfig config_;
  SimSetup setup_;
  std::vector<Controller> controllers_;  // indexed by vehicle id, 0 unused
};

Trajectory run(const SimConfig& config);

}  // namespace mixtraffic
