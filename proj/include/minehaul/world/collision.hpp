#pragma once

#include <span>

#include "minehaul/world/map.hpp"
#include "minehaul/world/truck.hpp"

namespace minehaul::world {

struct CollisionReport {
  bool collision = false;
  bool hit_wall = false;
  bool hit_participant = false;
  int nearest_edge = -1;
  double lateral_deviation = 0.0;  // signed, left of the centerline's forward direction
  double heading_error = 0.0;      // truck heading minus centerline tangent, wrapped
};

CollisionReport check_collision(const TruckState& state, const TruckParams& params, const MineMap& map,
                                std::span<const OrientedBox> participants = {});

}  // namespace minehaul::world
