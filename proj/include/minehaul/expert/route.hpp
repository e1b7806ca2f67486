#pragma once

#include <optional>
#include <vector>

#include "minehaul/world/map.hpp"

namespace minehaul::expert {

using world::MineMap;
using world::Polyline;
using world::Turn;
using world::Vec2;
using world::kPi;
using world::unit;

struct DirectedEdge {
  int edge = 0;
  bool forward = true;
  bool operator==(const DirectedEdge&) const = default;
};

/// Stretch of the route that crosses an intersection.
struct RouteTurn {
  double s_begin = 0.0;
  double s_end = 0.0;
  double s_node = 0.0;
  Turn side = Turn::Straight;
  int intersection = -1;  // index into MineMap::intersections()
  double deflection = 0.0;
};

struct RouteOptions {
  double smooth_fillet_radius = 30.0;  // turns up to 60 degrees
  double sharp_fillet_radius = 15.0;
  double straight_zone = 10.0;  // half-length of the zone annotated for straight crossings
};

/// Reference line through the map: an ordered chain of directed edges
/// stitched into one polyline with filleted corners at intersections.
class Route {
 public:
  Route() = default;

  /// Closed route around a circuit edge.
  static Route circuit(const MineMap& map, int edge, bool forward);
  /// Open route along consecutive directed edges. Throws InvalidInput when
  /// consecutive edges do not share a node or a movement is not permitted.
  static Route chain(const MineMap& map, std::vector<DirectedEdge> edges, RouteOptions options = {});

  const Polyline& line() const { return line_; }
  bool closed() const { return line_.closed(); }
  double length() const { return line_.length(); }
  double width() const { return width_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }
  const std::vector<RouteTurn>& turns() const { return turns_; }

  /// Signed curvature at arc length s, tabulated at 1 m.
  double curvature(double s) const;
  /// Forward arc-length distance from a to b (wraps on closed routes).
  double ahead(double from, double to) const;

  /// First turn zone not yet passed within `distance` ahead of s.
  std::optional<RouteTurn> upcoming_turn(double s, double distance) const;

 private:
  void finish();

  Polyline line_;
  double width_ = 12.0;
  std::vector<DirectedEdge> edges_;
  std::vector<RouteTurn> turns_;
  std::vector<double> curvature_;
};

/// Shortest open route between two nodes over permitted movements.
std::optional<Route> plan_route(const MineMap& map, int start_node, int goal_node, RouteOptions options = {});

/// Keeps a projection hint so repeated queries stay local, and accumulates
/// unwrapped progress along closed routes.
class RouteTracker {
 public:
  RouteTracker() = default;
  RouteTracker(const Route& route, double s0);

  world::Projection update(Vec2 position);
  double progress() const { return progress_; }
  double s() const { return s_; }
  void reset(double s);

 private:
  const Route* route_ = nullptr;
  double s_ = 0.0;
  double progress_ = 0.0;
};

}  // namespace minehaul::expert
