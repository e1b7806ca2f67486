#pragma once

#include <optional>
#include <string>

#include "minehaul/command.hpp"
#include "minehaul/expert/route.hpp"
#include "minehaul/world/sensors.hpp"
#include "minehaul/world/truck.hpp"

namespace minehaul::expert {

using world::RangeScan;
using world::TruckParams;
using world::TruckState;

struct ExpertParams {
  double cruise_speed = 20.0 / 3.6;     // m/s
  double k_pp = 1.5;                    // s, pure pursuit lookahead gain
  double min_lookahead = 8.0;
  double max_lookahead = 25.0;
  double max_lateral_accel = 1.5;       // m/s^2, curvature cap sqrt(a / kappa)
  double comfort_decel = 0.4;           // m/s^2, used to plan the speed profile
  double preview = 100.0;               // m
  double speed_gain = 0.8;              // 1/s
  double max_accel = 0.5;               // m/s^2
  double max_decel = 1.0;               // m/s^2
  double follow_gap = 35.0;             // m, bumper to obstacle
  double obstacle_decel = 0.6;          // m/s^2
  double obstacle_horizon = 110.0;      // m
  double corridor_margin = 1.0;         // m inside the road edge
  double brake_switch_speed = 1.39;     // m/s, retarder above, friction brake below
};

/// Target speed from route geometry alone: cruise speed capped by curvature
/// ahead and by the stop at the end of an open route.
double profile_speed(const Route& route, double s, const ExpertParams& params = {});

/// Speed cap from range returns that fall inside the road corridor ahead.
/// Returns +inf when nothing blocks the route.
double obstacle_speed(const TruckState& state, const Route& route, double s, const RangeScan& scan,
                      const ExpertParams& params, const TruckParams& truck);

/// Maps a desired acceleration onto the four actuator channels.
ControlCommand longitudinal_command(double accel, double speed, const ExpertParams& params, const TruckParams& truck);

/// Scripted expert with a tracking hint along its route.
class ExpertDriver {
 public:
  ExpertDriver(const Route& route, TruckParams truck = {}, ExpertParams params = {});

  /// Throws ExpertLost when the truck is more than half a road width off the route.
  ControlCommand act(const TruckState& state, const RangeScan& scan);
  /// Re-anchors the tracker, e.g. after a reset.
  void reset(const TruckState& state);

  const Route& route() const { return *route_; }
  const ExpertParams& params() const { return params_; }
  const RouteTracker& tracker() const { return tracker_; }
  double last_target_speed() const { return target_; }
  double last_lateral() const { return lateral_; }

 private:
  ControlCommand decide(const TruckState& state, const world::Projection& p, const RangeScan& scan);

  const Route* route_;
  TruckParams truck_;
  ExpertParams params_;
  RouteTracker tracker_;
  bool anchored_ = false;
  double target_ = 0.0;
  double lateral_ = 0.0;
};

/// Stateless form: projects onto the whole route each call.
ControlCommand expert_policy(const TruckState& state, const Route& route, const RangeScan& scan,
                             const ExpertParams& params = {}, const TruckParams& truck = {});

enum class LateralCommand { Straight = 0, TurnLeft = 1, TurnRight = 2 };
enum class LongitudinalCommand { Accelerate = 0, Maintain = 1, Decelerate = 2 };

struct HighLevelCommand {
  LateralCommand lateral = LateralCommand::Straight;
  LongitudinalCommand longitudinal = LongitudinalCommand::Maintain;
  bool operator==(const HighLevelCommand&) const = default;
};

const char* to_string(LateralCommand c);
const char* to_string(LongitudinalCommand c);
LateralCommand lateral_from_string(const std::string& s);
LongitudinalCommand longitudinal_from_string(const std::string& s);

inline constexpr double kHlcBand = 1.0 / 3.6;  // m/s

/// Rule-based high-level command. `s_hint` restricts the route projection
/// to a window around a known arc length; without it the whole route is searched.
HighLevelCommand generate_hlc(const TruckState& state, const Route& route, double activation_distance = 50.0,
                              const ExpertParams& params = {}, std::optional<double> s_hint = std::nullopt);

}  // namespace minehaul::expert
