#pragma once

#include <cstdint>
#include <vector>

#include "minehaul/command.hpp"
#include "minehaul/observation.hpp"

namespace minehaul::data {

struct DemoFrame {
  Observation obs;
  ControlCommand label;  // clean expert command
  double s = 0.0;        // odometer, m
  double t = 0.0;        // s
  std::uint32_t segment = 0;  // contiguous run id; a change marks a gap
  bool operator==(const DemoFrame&) const = default;
};

struct Demonstration {
  int episode = 0;
  std::vector<DemoFrame> frames;
  bool operator==(const Demonstration&) const = default;
};

using DemonstrationSet = std::vector<Demonstration>;

std::size_t frame_count(const DemonstrationSet& demos);

/// Timestamps strictly increasing and odometer non-decreasing; throws InvalidInput.
void check_demonstration(const Demonstration& demo);

/// Supervision target: per channel c and lookahead k, y[c * K + k].
struct TrainingSample {
  Observation obs;
  std::vector<double> y;
  int K = 0;
  double s = 0.0;
  double t = 0.0;
  int episode = 0;

  double label(std::size_t channel, int k) const { return y[channel * K + k]; }
  double& label(std::size_t channel, int k) { return y[channel * K + k]; }
  bool operator==(const TrainingSample&) const = default;
};

}  // namespace minehaul::data
