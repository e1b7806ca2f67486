#pragma once

#include <span>

#include "minehaul/data/demonstration.hpp"

namespace minehaul::data {

struct FilterThresholds {
  double steer_low = -1.0;
  double steer_up = 1.0;
  double throttle_up = 1.0;
  bool operator==(const FilterThresholds&) const = default;
};

struct FilterReport {
  std::size_t total = 0;
  std::size_t removed = 0;
  std::size_t removed_steer = 0;
  std::size_t removed_throttle = 0;
  double removed_fraction() const { return total ? static_cast<double>(removed) / total : 0.0; }
};

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Steering bounds at the ((1-c)/2, 1-(1-c)/2) quantiles, throttle bound at
/// the upper one. Needs >= 1000 frames and c in (0.9, 1).
FilterThresholds fit_thresholds(const DemonstrationSet& demos, double confidence = 0.99);

/// A frame survives when low < str < up and acc < throttle_up. A degenerate
/// steering interval (low == up) admits exactly that value. Surviving runs are
/// relabelled into contiguous segments.
bool keeps(const FilterThresholds& thr, const ControlCommand& cmd);
DemonstrationSet filter_bias(const DemonstrationSet& demos, const FilterThresholds& thr, FilterReport* report = nullptr);

}  // namespace minehaul::data
