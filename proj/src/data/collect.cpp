#include "minehaul/data/collect.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "minehaul/errors.hpp"

namespace minehaul::data {

using expert::Route;
using world::TruckState;

std::vector<Route> navigation_routes(const world::MineMap& network) {
  std::vector<Route> out;
  for (int a : network.sites())
    for (int b : network.sites())
      if (a != b)
        if (auto r = expert::plan_route(network, a, b)) out.push_back(std::move(*r));
  return out;
}

namespace {

// Triangular steering pulses added to the executed command.
class SteeringNoise {
 public:
  SteeringNoise(const CollectConfig& cfg, std::mt19937_64& rng) : cfg_(cfg), rng_(rng) {}

  double sample(double t, double dt) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (t >= end_) {
      if (u(rng_) < cfg_.noise_rate * dt) {
        start_ = t;
        end_ = t + cfg_.noise_duration;
        amp_ = cfg_.noise_amplitude * (2.0 * u(rng_) - 1.0);
      } else {
        return 0.0;
      }
    }
    double x = (t - start_) / cfg_.noise_duration;
    return amp_ * (1.0 - std::abs(2.0 * x - 1.0));
  }

 private:
  const CollectConfig& cfg_;
  std::mt19937_64& rng_;
  double start_ = 0.0;
  double end_ = -1.0;
  double amp_ = 0.0;
};

Demonstration run_episode(const world::MineMap& map, const Route& route, double s0, bool perturb, int episode,
                          const CollectConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TruckState st;
  double h = route.line().heading_at(s0);
  double lateral = 0.0, yaw = 0.0;
  double speed = cfg.expert.cruise_speed;
  if (perturb) {
    lateral = cfg.perturb_lateral * (2.0 * u(rng) - 1.0);
    yaw = cfg.perturb_yaw_deg * world::kPi / 180.0 * (2.0 * u(rng) - 1.0);
    speed *= 0.6 + 0.4 * u(rng);
  }
  st.position = route.line().point_at(s0) + world::left_normal(world::unit(h)) * lateral;
  st.heading = world::wrap_angle(h + yaw);
  st.speed = speed;

  std::mt19937_64 traffic_rng(rng());
  expert::Simulator sim(map, cfg.truck, cfg.sim, expert::spawn_traffic(map, cfg.traffic, traffic_rng), rng());
  sim.place(st);
  expert::ExpertDriver driver(route, cfg.truck, cfg.expert);
  SteeringNoise noise(cfg, rng);

  Demonstration demo;
  demo.episode = episode;
  const double frame_dt = cfg.sim.physics_dt * cfg.sim.substeps;
  const int frames = static_cast<int>(std::round(cfg.episode_seconds / frame_dt));
  for (int n = 0; n < frames; ++n) {
    expert::SensorFrame f = sim.sense();
    ControlCommand label;
    try {
      label = driver.act(sim.truck(), f.scan);
    } catch (const ExpertLost&) {
      break;
    }
    if (!route.closed() && driver.tracker().s() > route.length() - 60.0) break;
    DemoFrame frame;
    frame.obs.scan = std::move(f.scan);
    frame.obs.gnss = f.gnss;
    frame.obs.speed = f.speed;
    frame.obs.hlc = expert::generate_hlc(sim.truck(), route, 50.0, cfg.expert, driver.tracker().s());
    frame.label = label;
    frame.s = sim.truck().odometer;
    frame.t = sim.truck().time;
    if (!demo.frames.empty() && !(frame.s > demo.frames.back().s)) break;

    ControlCommand exec = label;
    exec[0] = std::clamp(label[0] + noise.sample(sim.truck().time, frame_dt), -1.0, 1.0);
    bool crashed = false;
    for (int k = 0; k < cfg.sim.substeps; ++k) crashed |= sim.step(exec).collision;
    demo.frames.push_back(std::move(frame));
    if (crashed) break;
  }
  return demo;
}

}  // namespace

DemonstrationSet collect_demonstrations(const world::TestMaps& maps, const CollectConfig& cfg, std::uint64_t seed) {
  if (!(cfg.minutes > 0.0 && cfg.episode_seconds > 0.0)) throw InvalidInput("collection length must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Route loop_cw = Route::circuit(maps.loop_map, 0, false);
  const Route loop_ccw = Route::circuit(maps.loop_map, 0, true);
  const std::vector<Route> nav = navigation_routes(maps.network_map);
  const int episodes = static_cast<int>(std::ceil(cfg.minutes * 60.0 / cfg.episode_seconds));
  const double episode_len = cfg.expert.cruise_speed * cfg.episode_seconds;

  DemonstrationSet out;
  for (int e = 0; e < episodes; ++e) {
    bool on_loop = nav.empty() || u(rng) < cfg.loop_share;
    bool perturb = u(rng) < cfg.perturb_share;
    Demonstration d;
    if (on_loop) {
      const Route& r = u(rng) < 0.5 ? loop_ccw : loop_cw;
      d = run_episode(maps.loop_map, r, u(rng) * r.length(), perturb, e, cfg, rng);
    } else {
      const Route& r = nav[std::min(nav.size() - 1, static_cast<std::size_t>(u(rng) * nav.size()))];
      std::vector<const expert::RouteTurn*> turning;
      for (const auto& t : r.turns())
        if (t.side != world::Turn::Straight) turning.push_back(&t);
      double s0;
      if (!turning.empty() && u(rng) < cfg.turn_bias) {
        const auto* t = turning[std::min(turning.size() - 1, static_cast<std::size_t>(u(rng) * turning.size()))];
        s0 = t->s_begin - 40.0 - 110.0 * u(rng);
      } else {
        s0 = u(rng) * (r.length() - episode_len);
      }
      s0 = std::clamp(s0, 5.0, std::max(5.0, r.length() - 120.0));
      d = run_episode(maps.network_map, r, s0, perturb, e, cfg, rng);
    }
    if (!d.frames.empty()) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace minehaul::data
