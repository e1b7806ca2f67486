#include "minehaul/world/truck.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"

namespace minehaul::world {

void TruckParams::validate() const {
  if (!(wheelbase > 0.0 && length > 0.0 && width > 0.0 && max_steering > 0.0 && max_traction_accel > 0.0 &&
        electric_brake_gain > 0.0 && mechanical_brake_gain > 0.0 && electric_brake_fade_speed > 0.0 &&
        drag >= 0.0))
    throw InvalidInput("truck parameters must be strictly positive");
}

TruckState step_dynamics(const TruckState& state, const TruckParams& params, const ControlCommand& cmd, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw InvalidInput("dt must lie in (0, 0.1]");
  if (!cmd.finite() || !std::isfinite(state.position.x) || !std::isfinite(state.position.y) ||
      !std::isfinite(state.heading) || !std::isfinite(state.speed) || !std::isfinite(state.odometer))
    throw InvalidInput("non-finite truck state or command");
  for (std::size_t c = 0; c < kChannels; ++c)
    if (cmd[c] < channel_min(c) - 1e-9 || cmd[c] > channel_max(c) + 1e-9)
      throw InvalidInput("command channel out of range");

  TruckState next = state;
  const double v = state.speed;
  const double delta = cmd.steer() * params.max_steering;

  next.position = state.position + unit(state.heading) * (v * dt);
  next.heading = wrap_angle(state.heading + v * std::tan(delta) / params.wheelbase * dt);
  next.steering = delta;
  next.odometer = state.odometer + v * dt;
  next.time = state.time + dt;

  double traction = params.max_traction_accel * cmd.throttle();
  double retarder = params.electric_brake_gain * cmd.brake_electric() *
                    std::min(1.0, v / params.electric_brake_fade_speed);
  double friction = params.mechanical_brake_gain * cmd.brake_mechanical();
  double accel = traction - retarder - friction - params.drag * v;
  double nv = v + accel * dt;
  // Rounding residue of a friction stop counts as rest.
  if (nv <= 1e-9 * friction * dt) nv = 0.0;
  next.speed = nv;
  return next;
}

OrientedBox footprint(const TruckState& state, const TruckParams& params) {
  return {state.position, state.heading, params.length * 0.5, params.width * 0.5};
}

}  // namespace minehaul::world
