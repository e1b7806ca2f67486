#include "minehaul/expert/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minehaul/errors.hpp"

namespace minehaul::expert {

double profile_speed(const Route& route, double s, const ExpertParams& params) {
  const double len = route.length();
  double best = params.cruise_speed;
  for (double d = 0.0; d <= params.preview + 1e-9; d += 2.0) {
    double sp = s + d;
    if (!route.closed() && sp >= len) {
      double rest = std::max(0.0, len - s);
      best = std::min(best, std::sqrt(2.0 * params.comfort_decel * rest));
      break;
    }
    double kappa = std::abs(route.curvature(sp));
    double cap = params.cruise_speed;
    if (kappa > 1e-9) cap = std::min(cap, std::sqrt(params.max_lateral_accel / kappa));
    best = std::min(best, std::sqrt(cap * cap + 2.0 * params.comfort_decel * d));
  }
  return best;
}

double obstacle_speed(const TruckState& state, const Route& route, double s, const RangeScan& scan,
                      const ExpertParams& params, const TruckParams& truck) {
  const double half_corridor = route.width() * 0.5 - params.corridor_margin;
  const double window = params.obstacle_horizon * 0.5 + 10.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan.beams; ++i) {
    if (!scan.valid[i]) continue;
    Vec2 q = state.position + world::unit(state.heading + scan.beam_angle(i)) * scan.ranges[i];
    world::Projection p = route.line().project(q, s + params.obstacle_horizon * 0.5, window);
    if (!route.closed() && p.s >= route.length() - 0.5) continue;
    double along = route.ahead(s, p.s);
    if (along <= 0.0 || along > params.obstacle_horizon) continue;
    if (std::abs(p.lateral) > half_corridor || p.distance > half_corridor) continue;
    double gap = along - truck.length * 0.5;
    best = std::min(best, std::sqrt(2.0 * params.obstacle_decel * std::max(0.0, gap - params.follow_gap)));
  }
  return best;
}

ControlCommand longitudinal_command(double accel, double speed, const ExpertParams& params, const TruckParams& truck) {
  ControlCommand cmd;
  double u = accel + truck.drag * speed;
  if (u >= 0.0) {
    cmd[1] = std::min(1.0, u / truck.max_traction_accel);
  } else if (speed > params.brake_switch_speed) {
    double gain = truck.electric_brake_gain * std::min(1.0, speed / truck.electric_brake_fade_speed);
    cmd[2] = std::min(1.0, -u / gain);
  } else {
    cmd[3] = std::min(1.0, -u / truck.mechanical_brake_gain);
  }
  return cmd;
}

ExpertDriver::ExpertDriver(const Route& route, TruckParams truck, ExpertParams params)
    : route_(&route), truck_(truck), params_(params), tracker_(route, 0.0) {}

void ExpertDriver::reset(const TruckState& state) {
  tracker_.reset(route_->line().project(state.position).s);
  anchored_ = true;
}

ControlCommand ExpertDriver::act(const TruckState& state, const RangeScan& scan) {
  if (!anchored_) reset(state);
  world::Projection p = tracker_.update(state.position);
  return decide(state, p, scan);
}

ControlCommand ExpertDriver::decide(const TruckState& state, const world::Projection& p, const RangeScan& scan) {
  lateral_ = p.lateral;
  if (std::abs(p.lateral) > 0.5 * route_->width())
    throw ExpertLost("expert lost: lateral deviation " + std::to_string(p.lateral) + " m");

  const Route& route = *route_;
  const double v = state.speed;
  double look = std::clamp(params_.k_pp * v, params_.min_lookahead, params_.max_lookahead);
  double s_target = p.s + look;
  Vec2 target;
  if (!route.closed() && s_target > route.length()) {
    double h_end = route.line().heading_at(route.length());
    target = route.line().point_at(route.length()) + world::unit(h_end) * (s_target - route.length());
  } else {
    target = route.line().point_at(s_target);
  }
  Vec2 d = target - state.position;
  Vec2 f = world::unit(state.heading);
  double dx = world::dot(d, f);
  double dy = world::dot(d, world::left_normal(f));
  double kappa = 2.0 * dy / std::max(1e-9, dx * dx + dy * dy);
  double delta = std::atan(truck_.wheelbase * kappa);

  target_ = std::min(profile_speed(route, p.s, params_),
                     obstacle_speed(state, route, p.s, scan, params_, truck_));
  double err = target_ - v;
  double accel = err >= 0.0 ? params_.max_accel * std::tanh(params_.speed_gain * err / params_.max_accel)
                            : params_.max_decel * std::tanh(params_.speed_gain * err / params_.max_decel);
  ControlCommand cmd = longitudinal_command(accel, v, params_, truck_);
  cmd[0] = std::clamp(delta / truck_.max_steering, -1.0, 1.0);
  return cmd;
}

ControlCommand expert_policy(const TruckState& state, const Route& route, const RangeScan& scan,
                             const ExpertParams& params, const TruckParams& truck) {
  ExpertDriver driver(route, truck, params);
  return driver.act(state, scan);
}

const char* to_string(LateralCommand c) {
  switch (c) {
    case LateralCommand::Straight: return "straight";
    case LateralCommand::TurnLeft: return "turn-left";
    case LateralCommand::TurnRight: return "turn-right";
  }
  return "?";
}

const char* to_string(LongitudinalCommand c) {
  switch (c) {
    case LongitudinalCommand::Accelerate: return "accelerate";
    case LongitudinalCommand::Maintain: return "maintain";
    case LongitudinalCommand::Decelerate: return "decelerate";
  }
  return "?";
}

LateralCommand lateral_from_string(const std::string& s) {
  if (s == "straight") return LateralCommand::Straight;
  if (s == "turn-left") return LateralCommand::TurnLeft;
  if (s == "turn-right") return LateralCommand::TurnRight;
  throw ParseError("unknown lateral command: " + s);
}

LongitudinalCommand longitudinal_from_string(const std::string& s) {
  if (s == "accelerate") return LongitudinalCommand::Accelerate;
  if (s == "maintain") return LongitudinalCommand::Maintain;
  if (s == "decelerate") return LongitudinalCommand::Decelerate;
  throw ParseError("unknown longitudinal command: " + s);
}

HighLevelCommand generate_hlc(const TruckState& state, const Route& route, double activation_distance,
                              const ExpertParams& params, std::optional<double> s_hint) {
  if (!(activation_distance > 0.0)) throw InvalidInput("activation distance must be positive");
  world::Projection p = s_hint ? route.line().project(state.position, *s_hint, 40.0) : route.line().project(state.position);
  HighLevelCommand hlc;
  if (auto turn = route.upcoming_turn(p.s, activation_distance)) {
    if (turn->side == Turn::Left) hlc.lateral = LateralCommand::TurnLeft;
    if (turn->side == Turn::Right) hlc.lateral = LateralCommand::TurnRight;
  }
  double diff = profile_speed(route, p.s, params) - state.speed;
  if (diff > kHlcBand)
    hlc.longitudinal = LongitudinalCommand::Accelerate;
  else if (diff < -kHlcBand)
    hlc.longitudinal = LongitudinalCommand::Decelerate;
  return hlc;
}

}  // namespace minehaul::expert
