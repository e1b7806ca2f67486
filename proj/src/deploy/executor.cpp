#include "minehaul/deploy/executor.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "minehaul/errors.hpp"

namespace minehaul::deploy {

model::EvidentialPrediction PlannerPolicy::predict(const PolicyInput& in) {
  return planner_->predict(in.obs).prediction;
}

ExpertPolicy::ExpertPolicy(const expert::Route& route, world::TruckParams truck, expert::ExpertParams params, int K)
    : driver_(route, truck, params), K_(K) {}

model::EvidentialPrediction ExpertPolicy::predict(const PolicyInput& in) {
  ControlCommand u = driver_.act(in.truth, in.obs.scan);
  model::EvidentialPrediction p;
  p.K = K_;
  for (std::size_t c = 0; c < kChannels; ++c) p.channels[c].assign(K_, model::NigParams{u[c], 1.0, 2.0, 1.0});
  return p;
}

namespace {

Event make_event(const char* kind, const world::TruckState& s) {
  return Event{kind, s.odometer, s.time, s.position.x, s.position.y};
}

}  // namespace

EpisodeResult run_executor(expert::Simulator& sim, const expert::Route& route, Policy& policy,
                           const EpisodeConfig& cfg, const std::function<bool(const TickInfo&)>& on_tick) {
  EpisodeResult res;
  const int K = policy.K();
  FusionBuffer buffer(K, 1.0);
  expert::RouteTracker tracker(route, route.line().project(sim.truck().position).s);
  const int substeps = sim.config().substeps;
  const double end_s = route.closed() ? route.length() : route.length() - cfg.end_margin;

  model::EvidentialPrediction latest;
  ControlCommand command;
  long current_bin = FusionBuffer::bin_index(sim.truck().odometer);
  bool have_prediction = false;
  std::string pending;  // event tag for the next trajectory row

  auto add_event = [&](const char* kind) {
    res.events.push_back(make_event(kind, sim.truck()));
    pending = pending.empty() ? kind : pending + "|" + kind;
  };

  for (std::size_t tick = 0;; ++tick) {
    const world::TruckState& st = sim.truck();
    if (st.time >= cfg.max_time - 1e-9) break;

    if (tick % substeps == 0) {
      expert::SensorFrame f = sim.sense();
      Observation obs;
      obs.scan = std::move(f.scan);
      obs.gnss = f.gnss;
      obs.speed = f.speed;
      obs.hlc = expert::generate_hlc(st, route, cfg.hlc_activation, cfg.expert, tracker.s());
      if (!obs.gnss.valid) {
        ++res.gnss_losses;
        add_event("gnss_loss");
      }
      latest = policy.predict(PolicyInput{obs, st, tracker.s()});
      ++res.inferences;
      bool finite = true;
      for (std::size_t c = 0; c < kChannels; ++c)
        for (int k = 0; k < K; ++k) {
          const auto& p = latest.at(c, k);
          finite &= std::isfinite(p.gamma) && std::isfinite(p.nu) && std::isfinite(p.alpha) && std::isfinite(p.beta);
        }
      if (!finite) {
        add_event("safety_stop");
        res.failed = true;
        break;
      }
      buffer.ingest(st.odometer, latest);
      have_prediction = true;
      current_bin = FusionBuffer::bin_index(st.odometer);
      buffer.evict_before(current_bin);
      command = fuse(buffer, current_bin, cfg.mode, latest);
      res.max_buffer_entries = std::max(res.max_buffer_entries, buffer.entry_count());
    } else if (have_prediction) {
      long d = FusionBuffer::bin_index(st.odometer);
      if (d != current_bin) {
        current_bin = d;
        buffer.evict_before(d);
        command = fuse(buffer, d, cfg.mode, latest);
      }
    }

    world::CollisionReport rep = sim.step(command);
    ++res.physics_steps;
    const world::TruckState& now = sim.truck();
    world::Projection p = tracker.update(now.position);
    const double head_err = world::wrap_angle(now.heading - p.heading);
    bool intervention = false;
    if (rep.collision) {
      ++res.collisions;
      add_event("collision");
    }
    if (cfg.interventions &&
        (rep.collision || std::abs(p.lateral) > 0.5 * route.width() || std::abs(head_err) > cfg.heading_limit)) {
      intervention = true;
      ++res.interventions;
      add_event("intervention");
    }
    if (cfg.log_trajectory) {
      TrajectoryRow row{now.time, now.position.x, now.position.y, now.heading, now.speed, command,
                        p.lateral, head_err, pending};
      res.trajectory.push_back(std::move(row));
    }
    pending.clear();

    res.progress = tracker.progress();
    bool go_on = true;
    if (on_tick) go_on = on_tick(TickInfo{now, p.lateral, head_err, res.progress, tracker.s(), rep.collision, intervention});
    if (intervention) {
      // back onto the nearest reference point, aligned with the road
      world::TruckState reset = now;
      reset.position = p.foot;
      reset.heading = p.heading;
      reset.steering = 0.0;
      sim.place(reset);
      policy.reset(reset);
      buffer.clear();
      have_prediction = false;
      command = ControlCommand{};
    }
    if (!go_on) break;
    if (cfg.distance > 0.0 ? res.progress >= cfg.distance : (!route.closed() && tracker.s() >= end_s)) {
      res.completed = true;
      break;
    }
  }
  res.odometer = sim.truck().odometer;
  res.buffer_reads = buffer.reads();
  return res;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << kTrajectoryHeader << "\n";
  os.precision(10);
  for (const TrajectoryRow& r : rows) {
    os << r.t << ',' << r.x << ',' << r.y << ',' << r.heading << ',' << r.speed;
    for (std::size_t c = 0; c < kChannels; ++c) os << ',' << r.cmd[c];
    os << ',' << r.lat_err << ',' << r.head_err << ',' << r.event << "\n";
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void write_events_jsonl(const std::filesystem::path& path, const std::vector<Event>& events) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  for (const Event& e : events)
    os << nlohmann::json{{"kind", e.kind}, {"s", e.s}, {"t", e.t}, {"x", e.x}, {"y", e.y}}.dump() << "\n";
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace minehaul::deploy
