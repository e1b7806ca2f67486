#pragma once

#include "minehaul/command.hpp"
#include "minehaul/expert/driver.hpp"
#include "minehaul/world/sensors.hpp"

namespace minehaul {

/// What the planner sees at one 10 Hz sensor frame.
struct Observation {
  world::RangeScan scan;
  world::GnssFix gnss;
  double speed = 0.0;  // m/s, estimated from consecutive fixes
  expert::HighLevelCommand hlc;
  bool operator==(const Observation&) const = default;
};

}  // namespace minehaul
