#pragma once

#include <random>
#include <vector>

#include "minehaul/expert/route.hpp"

namespace minehaul::expert {

/// Scripted participant driving its route centerline at constant speed.
/// Open routes are driven back and forth.
struct Participant {
  Route route;
  double s = 0.0;
  double speed = 3.0;   // m/s
  int direction = 1;    // +1 along the route, -1 against it
  double half_length = 6.5;
  double half_width = 3.5;

  world::OrientedBox footprint() const;
  void advance(double dt);
};

using TrafficSet = std::vector<Participant>;

/// n participants on random edges with speeds uniform in [8, 16] km/h.
TrafficSet spawn_traffic(const MineMap& map, int n, std::mt19937_64& rng);

std::vector<world::OrientedBox> footprints(const TrafficSet& traffic);

}  // namespace minehaul::expert
