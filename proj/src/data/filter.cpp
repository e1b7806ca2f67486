#include "minehaul/data/filter.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"

namespace minehaul::data {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientData("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double f = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * f;
}

FilterThresholds fit_thresholds(const DemonstrationSet& demos, double confidence) {
  if (!(confidence > 0.9 && confidence < 1.0)) throw InvalidInput("confidence must lie in (0.9, 1)");
  std::vector<double> steer, throttle;
  for (const Demonstration& d : demos)
    for (const DemoFrame& f : d.frames) {
      steer.push_back(f.label.steer());
      throttle.push_back(f.label.throttle());
    }
  if (steer.size() < 1000)
    throw InsufficientData("fit_thresholds needs >= 1000 frames, got " + std::to_string(steer.size()));
  double tail = (1.0 - confidence) * 0.5;
  FilterThresholds t;
  t.steer_low = quantile(steer, tail);
  t.steer_up = quantile(steer, 1.0 - tail);
  t.throttle_up = quantile(std::move(throttle), 1.0 - tail);
  return t;
}

namespace {

bool steer_ok(const FilterThresholds& thr, double a) {
  if (thr.steer_low == thr.steer_up) return a == thr.steer_low;
  return a > thr.steer_low && a < thr.steer_up;
}

}  // namespace

bool keeps(const FilterThresholds& thr, const ControlCommand& cmd) {
  return steer_ok(thr, cmd.steer()) && cmd.throttle() < thr.throttle_up;
}

DemonstrationSet filter_bias(const DemonstrationSet& demos, const FilterThresholds& thr, FilterReport* report) {
  FilterReport rep;
  DemonstrationSet out;
  out.reserve(demos.size());
  for (const Demonstration& d : demos) {
    Demonstration kept;
    kept.episode = d.episode;
    std::uint32_t seg = 0;
    bool gap = false;
    for (std::size_t i = 0; i < d.frames.size(); ++i) {
      const DemoFrame& f = d.frames[i];
      ++rep.total;
      bool s_ok = steer_ok(thr, f.label.steer());
      bool a_ok = f.label.throttle() < thr.throttle_up;
      if (!s_ok) ++rep.removed_steer;
      if (!a_ok) ++rep.removed_throttle;
      if (!(s_ok && a_ok)) {
        ++rep.removed;
        gap = true;
        continue;
      }
      DemoFrame g = f;
      if (!kept.frames.empty() && (gap || f.segment != d.frames[i - 1].segment)) ++seg;
      gap = false;
      g.segment = seg;
      kept.frames.push_back(std::move(g));
    }
    if (!kept.frames.empty()) out.push_back(std::move(kept));
  }
  if (report) *report = rep;
  return out;
}

}  // namespace minehaul::data
