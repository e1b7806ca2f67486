#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "minehaul/world/map.hpp"
#include "minehaul/world/truck.hpp"

namespace minehaul::world {

inline constexpr double kScanMinRange = 4.0;
inline constexpr double kScanMaxRange = 120.0;
inline constexpr double kScanResolution = 0.2;

/// Planar range scan. Beam i points at heading - fov/2 + i * fov/(beams-1)
/// (or i * fov/beams for a full circle). Invalid beams carry range 120 m.
struct RangeScan {
  int beams = 0;
  double fov = 0.0;
  std::vector<double> ranges;
  std::vector<std::uint8_t> valid;
  double timestamp = 0.0;

  double beam_angle(int i) const;
  bool operator==(const RangeScan&) const = default;
};

/// Clamps to [4, 120] m and floors onto the 0.2 m grid.
double quantize_range(double r);

struct GnssFix {
  Vec2 position;  // (0, 0) sentinel when invalid
  double altitude = 0.0;
  bool valid = false;
  double timestamp = 0.0;

  bool operator==(const GnssFix&) const = default;
};

RangeScan cast_scan(const TruckState& state, const MineMap& map, int beams, double fov,
                    std::span<const OrientedBox> obstacles = {});

/// Returns the sentinel fix with probability `failure_prob`, else the exact position.
GnssFix sample_gnss(const TruckState& state, double failure_prob, std::mt19937_64& rng);

}  // namespace minehaul::world
