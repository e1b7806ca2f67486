#pragma once

#include <cstdint>

#include "minehaul/data/demonstration.hpp"
#include "minehaul/expert/driver.hpp"
#include "minehaul/expert/simulation.hpp"
#include "minehaul/world/map.hpp"

namespace minehaul::data {

struct CollectConfig {
  double minutes = 30.0;
  double episode_seconds = 60.0;
  double loop_share = 0.5;       // remaining episodes run on network routes
  double turn_bias = 0.7;        // network episodes started shortly before a turn
  // Steering noise on the executed command only; labels stay clean.
  double noise_rate = 0.15;      // pulses per second
  double noise_amplitude = 0.25;
  double noise_duration = 1.5;   // s
  // Share of episodes started off the reference line.
  double perturb_share = 0.5;
  double perturb_yaw_deg = 10.0;
  double perturb_lateral = 1.0;
  int traffic = 0;
  expert::SimConfig sim;
  expert::ExpertParams expert;
  world::TruckParams truck;
};

/// Every start/goal site pair on the network map that has a route.
std::vector<expert::Route> navigation_routes(const world::MineMap& network);

DemonstrationSet collect_demonstrations(const world::TestMaps& maps, const CollectConfig& config, std::uint64_t seed);

}  // namespace minehaul::data
