#include "minehaul/world/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"

namespace minehaul::world {

double RangeScan::beam_angle(int i) const {
  bool full = fov >= 2.0 * kPi - 1e-12;
  if (full) return -kPi + i * fov / beams;
  return -fov * 0.5 + i * fov / (beams - 1);
}

double quantize_range(double r) {
  r = std::clamp(r, kScanMinRange, kScanMaxRange);
  return std::floor(r / kScanResolution + 1e-9) * kScanResolution;
}

RangeScan cast_scan(const TruckState& state, const MineMap& map, int beams, double fov,
                    std::span<const OrientedBox> obstacles) {
  if (beams < 8) throw InvalidInput("scan needs at least 8 beams");
  if (!(fov > 0.0 && fov <= 2.0 * kPi + 1e-12)) throw InvalidInput("scan field of view must lie in (0, 2pi]");
  RangeScan scan;
  scan.beams = beams;
  scan.fov = fov;
  scan.timestamp = state.time;
  scan.ranges.assign(beams, kScanMaxRange);
  scan.valid.assign(beams, 0);

  std::vector<Segment> candidates;
  std::vector<std::uint32_t> ids;
  map.wall_grid().query(state.position, kScanMaxRange, ids);
  candidates.reserve(ids.size() + obstacles.size() * 4);
  for (std::uint32_t id : ids) candidates.push_back(map.wall_grid().segment(id));
  for (const OrientedBox& box : obstacles) {
    if (norm(box.center - state.position) > kScanMaxRange + box.half_length + box.half_width) continue;
    auto c = box.corners();
    for (int k = 0; k < 4; ++k) candidates.push_back({c[k], c[(k + 1) % 4]});
  }

  for (int i = 0; i < beams; ++i) {
    Vec2 dir = unit(state.heading + scan.beam_angle(i));
    double best = kScanMaxRange + 1.0;
    for (const Segment& s : candidates) {
      auto t = ray_segment(state.position, dir, s.a, s.b);
      if (t && *t < best) best = *t;
    }
    if (best <= kScanMaxRange) {
      scan.ranges[i] = quantize_range(best);
      scan.valid[i] = 1;
    }
  }
  return scan;
}

GnssFix sample_gnss(const TruckState& state, double failure_prob, std::mt19937_64& rng) {
  if (!(failure_prob >= 0.0 && failure_prob <= 1.0)) throw InvalidInput("failure probability must lie in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GnssFix fix;
  fix.timestamp = state.time;
  if (u(rng) < failure_prob) return fix;
  fix.position = state.position;
  fix.valid = true;
  return fix;
}

}  // namespace minehaul::world
