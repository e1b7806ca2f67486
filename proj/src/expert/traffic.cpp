#include "minehaul/expert/traffic.hpp"

#include "minehaul/errors.hpp"

namespace minehaul::expert {

world::OrientedBox Participant::footprint() const {
  double h = route.line().heading_at(s);
  if (direction < 0) h = world::wrap_angle(h + kPi);
  return {route.line().point_at(s), h, half_length, half_width};
}

void Participant::advance(double dt) {
  s += direction * speed * dt;
  if (route.closed()) {
    s = route.line().normalize(s);
    return;
  }
  if (s > route.length()) {
    s = 2.0 * route.length() - s;
    direction = -1;
  } else if (s < 0.0) {
    s = -s;
    direction = 1;
  }
}

TrafficSet spawn_traffic(const MineMap& map, int n, std::mt19937_64& rng) {
  if (n < 0) throw InvalidInput("spawn_traffic: negative count");
  TrafficSet out;
  if (n == 0 || map.edges().empty()) return out;
  std::uniform_int_distribution<int> pick_edge(0, static_cast<int>(map.edges().size()) - 1);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  std::uniform_real_distribution<double> speed(8.0 / 3.6, 16.0 / 3.6);
  for (int i = 0; i < n; ++i) {
    int e = pick_edge(rng);
    bool forward = !map.edges()[e].bidirectional || unit01(rng) < 0.5;
    Participant p;
    p.route = map.edges()[e].centerline.closed() ? Route::circuit(map, e, forward) : Route::chain(map, {{e, forward}});
    p.s = unit01(rng) * p.route.length();
    p.speed = speed(rng);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<world::OrientedBox> footprints(const TrafficSet& traffic) {
  std::vector<world::OrientedBox> out;
  out.reserve(traffic.size());
  for (const Participant& p : traffic) out.push_back(p.footprint());
  return out;
}

}  // namespace minehaul::expert
