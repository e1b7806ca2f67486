#include "minehaul/world/collision.hpp"

#include <vector>

namespace minehaul::world {

CollisionReport check_collision(const TruckState& state, const TruckParams& params, const MineMap& map,
                                std::span<const OrientedBox> participants) {
  CollisionReport report;
  OrientedBox box = footprint(state, params);
  double reach = std::hypot(box.half_length, box.half_width) + 1.0;

  std::vector<std::uint32_t> ids;
  map.wall_grid().query(state.position, reach, ids);
  for (std::uint32_t id : ids) {
    const Segment& s = map.wall_grid().segment(id);
    if (box_intersects_segment(box, s.a, s.b)) {
      report.hit_wall = true;
      break;
    }
  }
  for (const OrientedBox& other : participants) {
    if (boxes_intersect(box, other)) {
      report.hit_participant = true;
      break;
    }
  }
  report.collision = report.hit_wall || report.hit_participant;

  auto nearest = map.nearest_centerline(state.position);
  if (nearest.edge >= 0) {
    report.nearest_edge = nearest.edge;
    report.lateral_deviation = nearest.projection.lateral;
    report.heading_error = wrap_angle(state.heading - nearest.projection.heading);
  }
  return report;
}

}  // namespace minehaul::world
