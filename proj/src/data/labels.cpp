#include "minehaul/data/labels.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"
#include "minehaul/world/sensors.hpp"

namespace minehaul::data {

std::vector<TrainingSample> build_lookahead_labels(const Demonstration& demo, int K, double spacing) {
  if (K < 1) throw InvalidInput("K must be >= 1");
  if (!(spacing > 0.0)) throw InvalidInput("spacing must be positive");
  std::vector<TrainingSample> out;
  const auto& fr = demo.frames;
  std::size_t a = 0;
  while (a < fr.size()) {
    std::size_t b = a + 1;
    while (b < fr.size() && fr[b].segment == fr[a].segment) ++b;
    for (std::size_t i = a + 1; i < b; ++i)
      if (!(fr[i].s > fr[i - 1].s))
        throw InvalidInput("odometer not strictly increasing in episode " + std::to_string(demo.episode));
    const double s_last = fr[b - 1].s;
    for (std::size_t i = a; i < b; ++i) {
      if (fr[i].s + (K - 1) * spacing > s_last + 1e-12) break;
      TrainingSample ts;
      ts.obs = fr[i].obs;
      ts.K = K;
      ts.s = fr[i].s;
      ts.t = fr[i].t;
      ts.episode = demo.episode;
      ts.y.assign(kChannels * K, 0.0);
      for (std::size_t c = 0; c < kChannels; ++c) ts.label(c, 0) = fr[i].label[c];
      std::size_t jj = i;
      for (int k = 1; k < K; ++k) {
        double target = fr[i].s + k * spacing;
        while (jj + 1 < b && fr[jj + 1].s < target) ++jj;
        // fr[jj].s < target <= fr[jj + 1].s, or target equals the last frame.
        std::size_t hi = std::min(jj + 1, b - 1);
        double w = hi == jj ? 0.0 : (target - fr[jj].s) / (fr[hi].s - fr[jj].s);
        w = std::clamp(w, 0.0, 1.0);
        for (std::size_t c = 0; c < kChannels; ++c)
          ts.label(c, k) = fr[jj].label[c] + (fr[hi].label[c] - fr[jj].label[c]) * w;
      }
      out.push_back(std::move(ts));
    }
    a = b;
  }
  return out;
}

std::vector<TrainingSample> build_lookahead_labels(const DemonstrationSet& demos, int K, double spacing) {
  std::vector<TrainingSample> out;
  for (const Demonstration& d : demos) {
    auto part = build_lookahead_labels(d, K, spacing);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

TrainingSample augment(const TrainingSample& sample, double c, double theta, bool drop_gnss, double k_yaw) {
  TrainingSample out = sample;
  world::RangeScan& scan = out.obs.scan;
  if (c != 1.0) {
    for (int i = 0; i < scan.beams; ++i) {
      if (!scan.valid[i]) continue;
      double r = scan.ranges[i] * c;
      if (r >= world::kScanMaxRange) {
        scan.valid[i] = 0;
        scan.ranges[i] = world::kScanMaxRange;
      } else {
        scan.ranges[i] = world::quantize_range(r);
      }
    }
    for (int k = 0; k < out.K; ++k) out.label(0, k) = std::clamp(out.label(0, k) / c, -1.0, 1.0);
  }
  if (theta != 0.0 && scan.beams > 1) {
    double step = scan.beam_angle(1) - scan.beam_angle(0);
    int shift = static_cast<int>(std::lround(theta / step));
    if (shift != 0) {
      bool full = std::abs(scan.fov - 2.0 * world::kPi) < 1e-12;
      auto ranges = scan.ranges;
      auto valid = scan.valid;
      for (int i = 0; i < scan.beams; ++i) {
        int src = i + shift;
        if (full) src = ((src % scan.beams) + scan.beams) % scan.beams;
        if (src >= 0 && src < scan.beams) {
          scan.ranges[i] = ranges[src];
          scan.valid[i] = valid[src];
        } else {
          scan.ranges[i] = world::kScanMaxRange;
          scan.valid[i] = 0;
        }
      }
    }
  }
  if (theta != 0.0) {
    for (int k = 0; k < out.K; ++k) {
      double w = out.K == 1 ? 1.0 : static_cast<double>(out.K - 1 - k) / (out.K - 1);
      out.label(0, k) = std::clamp(out.label(0, k) - k_yaw * theta * w, -1.0, 1.0);
    }
  }
  if (drop_gnss) {
    out.obs.gnss.valid = false;
    out.obs.gnss.position = {0.0, 0.0};
  }
  return out;
}

TrainingSample augment(const TrainingSample& sample, const AugmentParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double c = 1.0 + params.scale * (2.0 * u(rng) - 1.0);
  double theta = params.yaw_deg * world::kPi / 180.0 * (2.0 * u(rng) - 1.0);
  bool drop = u(rng) < params.gnss_drop;
  return augment(sample, c, theta, drop, params.k_yaw);
}

}  // namespace minehaul::data
