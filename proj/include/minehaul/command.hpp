#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>

namespace minehaul {

/// Actuator channels of a mining truck. Steering is lateral; the rest are
/// longitudinal (throttle, electric retarder, mechanical friction brake).
enum class Channel : std::size_t { Steer = 0, Throttle = 1, BrakeElectric = 2, BrakeMechanical = 3 };

inline constexpr std::size_t kChannels = 4;
inline constexpr std::array<std::string_view, kChannels> kChannelNames{"str", "acc", "dec_e", "dec_m"};

/// Valid command interval per channel: steering in [-1, 1], others in [0, 1].
inline constexpr double channel_min(std::size_t c) { return c == 0 ? -1.0 : 0.0; }
inline constexpr double channel_max(std::size_t) { return 1.0; }

struct ControlCommand {
  std::array<double, kChannels> values{0.0, 0.0, 0.0, 0.0};

  double& operator[](std::size_t c) { return values[c]; }
  double operator[](std::size_t c) const { return values[c]; }
  double steer() const { return values[0]; }
  double throttle() const { return values[1]; }
  double brake_electric() const { return values[2]; }
  double brake_mechanical() const { return values[3]; }

  bool finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
  ControlCommand clamped() const {
    ControlCommand out;
    for (std::size_t c = 0; c < kChannels; ++c) out[c] = std::clamp(values[c], channel_min(c), channel_max(c));
    return out;
  }
  bool operator==(const ControlCommand&) const = default;
};

inline ControlCommand make_command(double steer, double throttle, double brake_e, double brake_m) {
  return ControlCommand{{steer, throttle, brake_e, brake_m}};
}

}  // namespace minehaul
