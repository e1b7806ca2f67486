#pragma once

#include <cstdint>
#include <random>

#include "minehaul/expert/traffic.hpp"
#include "minehaul/world/collision.hpp"
#include "minehaul/world/sensors.hpp"
#include "minehaul/world/truck.hpp"

namespace minehaul::expert {

struct SimConfig {
  double physics_dt = 0.02;  // 50 Hz dynamics
  int substeps = 5;          // physics steps per 10 Hz sensor frame
  int beams = 108;
  double fov = 1.5 * kPi;
  double gnss_failure = 0.0;
};

/// Speed from consecutive valid fixes; holds the last estimate across dropouts.
class SpeedEstimator {
 public:
  void reset(double speed);
  double update(const world::GnssFix& fix);
  double value() const { return value_; }

 private:
  bool have_fix_ = false;
  world::GnssFix last_;
  double value_ = 0.0;
};

struct SensorFrame {
  world::RangeScan scan;
  world::GnssFix gnss;
  double speed = 0.0;
};

/// Ego truck plus scripted traffic on one map.
class Simulator {
 public:
  Simulator(const MineMap& map, world::TruckParams truck, SimConfig config, TrafficSet traffic, std::uint64_t seed);

  /// Places the truck and primes the speed estimator with its true speed.
  void place(const world::TruckState& state);
  const world::TruckState& truck() const { return state_; }
  const world::TruckParams& truck_params() const { return params_; }
  const SimConfig& config() const { return config_; }
  const MineMap& map() const { return *map_; }
  const TrafficSet& traffic() const { return traffic_; }

  SensorFrame sense();
  /// One physics step; returns the collision report of the new state.
  world::CollisionReport step(const ControlCommand& cmd);

 private:
  const MineMap* map_;
  world::TruckParams params_;
  SimConfig config_;
  TrafficSet traffic_;
  std::mt19937_64 rng_;
  world::TruckState state_;
  SpeedEstimator speed_;
};

}  // namespace minehaul::expert
