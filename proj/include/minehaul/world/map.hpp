#pragma once

#include <string>
#include <vector>

#include "minehaul/world/geometry.hpp"

namespace minehaul::world {

enum class Turn { Straight, Left, Right };

const char* to_string(Turn t);
Turn turn_from_string(const std::string& s);

struct Node {
  Vec2 position;
};

struct Edge {
  int from = 0;
  int to = 0;
  Polyline centerline;  // closed for a circuit edge with from == to
  double width = 12.0;
  bool bidirectional = true;
};

/// One permitted movement through an intersection node.
struct TurnMovement {
  int from_edge = 0;
  bool from_forward = true;  // arriving along the edge's forward direction
  int to_edge = 0;
  bool to_forward = true;
  Turn side = Turn::Straight;
  double deflection = 0.0;  // signed heading change, radians, left positive
};

struct Intersection {
  int node = 0;
  std::vector<int> edges;
  std::vector<TurnMovement> turns;
  /// Smallest |deflection| over the turning (non-straight) movements.
  double sharpness = 0.0;
};

struct MapBuildOptions {
  double junction_clearance = 30.0;  // walls removed within this radius of an intersection
  double wall_step = 2.0;
  double max_turn_deflection = 120.0 * kPi / 180.0;
  double straight_tolerance = 20.0 * kPi / 180.0;
  double dead_end_overrun = 10.0;
};

/// Haul-road network. Walls and intersections are derived from the node and
/// edge geometry by `finalize`, which also checks the map invariants.
class MineMap {
 public:
  MineMap() = default;
  MineMap(std::string name, std::vector<Node> nodes, std::vector<Edge> edges, std::vector<int> sites,
          MapBuildOptions options = {});

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Intersection>& intersections() const { return intersections_; }
  const std::vector<std::vector<Vec2>>& walls() const { return walls_; }
  const std::vector<int>& sites() const { return sites_; }
  const MapBuildOptions& options() const { return options_; }

  double total_length() const;
  /// Index into intersections() for a node, or -1.
  int intersection_at(int node) const;
  const TurnMovement* find_movement(int node, int from_edge, bool from_forward, int to_edge, bool to_forward) const;

  const SegmentGrid& wall_grid() const { return wall_grid_; }
  const SegmentGrid& centerline_grid() const { return centerline_grid_; }

  struct NearestCenterline {
    int edge = -1;
    Projection projection;
  };
  /// Nearest edge centerline within `radius`; edge = -1 when none.
  NearestCenterline nearest_centerline(Vec2 p, double radius = 60.0) const;

  /// Throws InvalidInput describing the first violated invariant.
  void validate(double truck_width) const;

 private:
  void build_intersections();
  void build_walls();
  void build_grids();

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Intersection> intersections_;
  std::vector<std::vector<Vec2>> walls_;
  std::vector<int> sites_;
  MapBuildOptions options_;
  SegmentGrid wall_grid_{25.0};
  SegmentGrid centerline_grid_{25.0};
  std::vector<std::uint32_t> centerline_offset_;  // first grid id of each edge
};

/// Test maps: a closed two-way loop with left and right curves, and a ring
/// road with six T-intersections leading to loading/dumping spurs.
struct TestMaps {
  MineMap loop_map;
  MineMap network_map;
};

MineMap build_loop_map();
MineMap build_network_map();
TestMaps build_test_maps();

}  // namespace minehaul::world
