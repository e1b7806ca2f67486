#include "minehaul/expert/simulation.hpp"

#include "minehaul/errors.hpp"

namespace minehaul::expert {

void SpeedEstimator::reset(double speed) {
  have_fix_ = false;
  value_ = speed;
}

double SpeedEstimator::update(const world::GnssFix& fix) {
  if (!fix.valid) return value_;
  if (have_fix_) {
    double dt = fix.timestamp - last_.timestamp;
    if (dt > 1e-9) value_ = world::norm(fix.position - last_.position) / dt;
  }
  last_ = fix;
  have_fix_ = true;
  return value_;
}

Simulator::Simulator(const MineMap& map, world::TruckParams truck, SimConfig config, TrafficSet traffic,
                     std::uint64_t seed)
    : map_(&map), params_(truck), config_(config), traffic_(std::move(traffic)), rng_(seed) {
  params_.validate();
  if (config_.substeps < 1) throw InvalidInput("substeps must be >= 1");
}

void Simulator::place(const world::TruckState& state) {
  state_ = state;
  speed_.reset(state.speed);
}

SensorFrame Simulator::sense() {
  SensorFrame f;
  auto boxes = footprints(traffic_);
  f.scan = world::cast_scan(state_, *map_, config_.beams, config_.fov, boxes);
  f.gnss = world::sample_gnss(state_, config_.gnss_failure, rng_);
  f.speed = speed_.update(f.gnss);
  return f;
}

world::CollisionReport Simulator::step(const ControlCommand& cmd) {
  state_ = world::step_dynamics(state_, params_, cmd, config_.physics_dt);
  for (Participant& p : traffic_) p.advance(config_.physics_dt);
  auto boxes = footprints(traffic_);
  return world::check_collision(state_, params_, *map_, boxes);
}

}  // namespace minehaul::expert
