#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace minehaul::objectives {

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t probes = 0;
  bool passed = false;
};

/// Central-difference checks of every loss term and every network layer type,
/// including the full planner through the multi-task loss.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed = 1, double tolerance = 1e-4, std::size_t probes = 64);

}  // namespace minehaul::objectives
