#pragma once

#include "minehaul/command.hpp"
#include "minehaul/world/geometry.hpp"

namespace minehaul::world {

struct TruckState {
  Vec2 position;         // m, footprint center and sensor origin
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s, never negative
  double steering = 0.0; // rad, front wheel angle
  double odometer = 0.0; // m, cumulative travelled distance
  double time = 0.0;     // s

  bool operator==(const TruckState&) const = default;
};

/// Defaults describe a 930E-class haul truck.
struct TruckParams {
  double wheelbase = 6.0;
  double length = 13.0;
  double width = 7.0;
  double max_steering = 35.0 * kPi / 180.0;
  double max_traction_accel = 1.0;
  double electric_brake_gain = 1.2;     // m/s^2 at full command, at or above the fade speed
  double mechanical_brake_gain = 2.0;   // m/s^2 at full command
  double electric_brake_fade_speed = 1.39;  // m/s (5 km/h)
  double drag = 0.02;                   // 1/s

  /// Throws InvalidInput when a gain is not strictly positive.
  void validate() const;
};

/// Kinematic bicycle step. The retarder decelerates in proportion to
/// min(1, v / v_fade) and so cannot bring the truck to rest; the friction brake
/// decelerates at a constant rate and holds it at rest.
TruckState step_dynamics(const TruckState& state, const TruckParams& params, const ControlCommand& cmd, double dt);

OrientedBox footprint(const TruckState& state, const TruckParams& params);

}  // namespace minehaul::world
