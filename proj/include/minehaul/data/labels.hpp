#pragma once

#include <random>

#include "minehaul/data/demonstration.hpp"

namespace minehaul::data {

/// For each frame, y_k = recorded commands linearly interpolated at odometer
/// s + k * spacing within the frame's segment. Frames whose horizon leaves
/// the segment are dropped.
std::vector<TrainingSample> build_lookahead_labels(const Demonstration& demo, int K, double spacing);
std::vector<TrainingSample> build_lookahead_labels(const DemonstrationSet& demos, int K, double spacing);

struct AugmentParams {
  double scale = 0.05;        // c ~ U[1 - scale, 1 + scale]
  double yaw_deg = 10.0;      // theta ~ U[-yaw, +yaw]
  double gnss_drop = 0.003;
  double k_yaw = 1.0;         // normalized steering per radian
  bool operator==(const AugmentParams&) const = default;
};

/// Scales ranges by c, yaws the scan by theta (truck turned left by theta),
/// optionally drops the fix. Steering labels become y / c - k_yaw * theta * w_k
/// with w_k decaying linearly from 1 at k = 0 to 0 at k = K-1.
TrainingSample augment(const TrainingSample& sample, double c, double theta, bool drop_gnss, double k_yaw);
TrainingSample augment(const TrainingSample& sample, const AugmentParams& params, std::mt19937_64& rng);

}  // namespace minehaul::data
