#include "minehaul/bench/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "minehaul/data/collect.hpp"
#include "minehaul/errors.hpp"

namespace minehaul::bench {

using expert::Route;
using nlohmann::json;

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::LaneStable: return "lane-stable";
    case TaskKind::Disturbance: return "disturbance";
    case TaskKind::Navigation: return "navigation";
  }
  return "?";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::CounterClockwise: return "ccw";
    case Direction::Clockwise: return "cw";
    case Direction::Both: return "both";
    case Direction::Alternate: return "alternate";
  }
  return "?";
}

TaskKind task_from_string(const std::string& s) {
  for (TaskKind k : {TaskKind::LaneStable, TaskKind::Disturbance, TaskKind::Navigation})
    if (s == to_string(k)) return k;
  throw ParseError("unknown task '" + s + "'", 0);
}

Direction direction_from_string(const std::string& s) {
  for (Direction d : {Direction::CounterClockwise, Direction::Clockwise, Direction::Both, Direction::Alternate})
    if (s == to_string(d)) return d;
  throw ParseError("unknown direction '" + s + "'", 0);
}

void validate(const TaskSpec& spec) {
  if (spec.seeds.empty()) throw InvalidInput("benchmark needs at least one seed");
  if (!(spec.gnss_failure >= 0.0 && spec.gnss_failure <= 1.0)) throw InvalidInput("gnss failure must be in [0, 1]");
  if (spec.kind == TaskKind::LaneStable && !(spec.distance >= 1000.0))
    throw InvalidInput("lane-stable distance must be at least 1000 m");
  if (spec.kind == TaskKind::Navigation && !(spec.min_route_length >= 1000.0))
    throw InvalidInput("navigation routes must be at least 1000 m");
  if (spec.kind == TaskKind::Disturbance && spec.trials * static_cast<int>(spec.seeds.size()) < 30)
    throw InvalidInput("disturbance needs at least 30 trials per class");
  if (spec.jobs < 1) throw InvalidInput("jobs must be >= 1");
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double mean_of(const std::vector<EpisodeRecord>& eps, double (*f)(const EpisodeRecord&)) {
  if (eps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : eps) s += f(e);
  return s / static_cast<double>(eps.size());
}

// Runs jobs[i] into out[i]; the first exception is rethrown after the loop.
template <class T, class F>
void parallel_fill(std::vector<T>& out, int jobs, F&& f) {
  std::exception_ptr err;
  const long n = static_cast<long>(out.size());
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

bool counter_clockwise(const world::Polyline& line) {
  const auto& p = line.points();
  double area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    area += a.x * b.y - b.x * a.y;
  }
  return area > 0.0;
}

Route loop_route(const world::MineMap& loop, bool ccw) {
  Route fwd = Route::circuit(loop, 0, true);
  return counter_clockwise(fwd.line()) == ccw ? fwd : Route::circuit(loop, 0, false);
}

std::vector<bool> directions(Direction d) {
  if (d == Direction::Both || d == Direction::Alternate) return {true, false};
  return {d == Direction::CounterClockwise};
}

world::TruckState start_state(const Route& route, double s, double lateral, double yaw, const expert::ExpertParams& ep) {
  world::TruckState st;
  double h = route.line().heading_at(s);
  st.position = route.line().point_at(s) + world::left_normal(world::unit(h)) * lateral;
  st.heading = world::wrap_angle(h + yaw);
  st.speed = expert::profile_speed(route, s, ep);
  return st;
}

deploy::EpisodeConfig episode_config(const TaskSpec& spec, const BenchEnv& env) {
  deploy::EpisodeConfig cfg;
  cfg.mode = spec.mode;
  cfg.expert = env.expert;
  cfg.log_trajectory = spec.keep_trajectories;
  return cfg;
}

void copy_result(EpisodeRecord& rec, deploy::EpisodeResult&& r) {
  rec.collisions = r.collisions;
  rec.interventions = r.interventions;
  rec.gnss_losses = r.gnss_losses;
  rec.distance = r.progress;
  for (auto& e : r.events)
    if (e.kind != "gnss_loss") rec.events.push_back(std::move(e));
  rec.trajectory = std::move(r.trajectory);
}

expert::SimConfig sim_config(const TaskSpec& spec, const BenchEnv& env) {
  expert::SimConfig sc = env.sim;
  sc.gnss_failure = spec.gnss_failure;
  return sc;
}

const world::TestMaps& maps_of(const BenchEnv& env) {
  if (!env.maps) throw InvalidInput("benchmark environment has no maps");
  return *env.maps;
}

BenchmarkReport make_report(const TaskSpec& spec, const char* default_map) {
  BenchmarkReport rep;
  rep.kind = spec.kind;
  rep.mode = spec.mode;
  rep.map_id = spec.map_id.empty() ? default_map : spec.map_id;
  rep.gnss_failure = spec.gnss_failure;
  rep.seeds = spec.seeds;
  return rep;
}

}  // namespace

std::map<std::string, double> aggregate(TaskKind kind, const std::vector<EpisodeRecord>& eps) {
  std::map<std::string, double> a;
  a["episodes"] = static_cast<double>(eps.size());
  a["mean_collisions"] = mean_of(eps, [](const EpisodeRecord& e) { return double(e.collisions); });
  a["mean_interventions"] = mean_of(eps, [](const EpisodeRecord& e) { return double(e.interventions); });
  a["mean_events"] = mean_of(eps, [](const EpisodeRecord& e) { return double(e.event_count()); });
  a["mean_gnss_losses"] = mean_of(eps, [](const EpisodeRecord& e) { return double(e.gnss_losses); });
  a["mean_completion"] = mean_of(eps, [](const EpisodeRecord& e) { return e.completion; });
  a["success_rate"] = mean_of(eps, [](const EpisodeRecord& e) { return e.success ? 1.0 : 0.0; });
  double dist = 0.0, interv = 0.0;
  for (const auto& e : eps) dist += e.distance, interv += e.interventions;
  a["interventions_per_1500m"] = dist > 0.0 ? interv / dist * 1500.0 : 0.0;

  std::map<std::string, std::vector<EpisodeRecord>> by_scenario;
  if (kind != TaskKind::Navigation)
    for (const auto& e : eps) by_scenario[e.scenario].push_back(e);
  for (const auto& [name, group] : by_scenario) {
    a["success_rate[" + name + "]"] = mean_of(group, [](const EpisodeRecord& e) { return e.success ? 1.0 : 0.0; });
    a["mean_interventions[" + name + "]"] = mean_of(group, [](const EpisodeRecord& e) { return double(e.interventions); });
    a["mean_events[" + name + "]"] = mean_of(group, [](const EpisodeRecord& e) { return double(e.event_count()); });
  }

  if (kind == TaskKind::Navigation) {
    std::map<std::string, std::pair<double, double>> pass;  // passed, seen
    auto add = [&](const std::string& key, bool ok) {
      auto& p = pass[key];
      p.first += ok ? 1.0 : 0.0;
      p.second += 1.0;
    };
    for (const auto& e : eps)
      for (const auto& x : e.intersections) {
        add("pass_rate", x.passed);
        add("pass_rate[" + x.side + "]", x.passed);
        if (x.side != "straight") add(std::abs(x.deflection_deg) <= 60.0 ? "pass_rate[smooth]" : "pass_rate[sharp]", x.passed);
        add("pass_rate[i" + std::to_string(x.intersection) + "/" + x.direction + "/" + x.side + "]", x.passed);
      }
    for (const auto& [k, p] : pass) a[k] = p.first / p.second;
    if (!pass.count("pass_rate")) a["pass_rate"] = 0.0;
  }
  return a;
}

PolicyFactory expert_factory(int K) {
  return [K](const Route& route) -> std::unique_ptr<deploy::Policy> {
    return std::make_unique<deploy::ExpertPolicy>(route, world::TruckParams{}, expert::ExpertParams{}, K);
  };
}

PolicyFactory planner_factory(const model::FusionPlanner& planner) {
  return [&planner](const Route&) -> std::unique_ptr<deploy::Policy> {
    return std::make_unique<deploy::PlannerPolicy>(planner);
  };
}

BenchmarkReport run_lane_stable(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy) {
  validate(spec);
  const auto& maps = maps_of(env);
  BenchmarkReport rep = make_report(spec, "loop_map");
  const std::vector<bool> dirs = directions(spec.direction);
  std::vector<Route> routes;
  for (bool ccw : dirs) routes.push_back(loop_route(maps.loop_map, ccw));

  struct Job {
    std::size_t route;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
    if (spec.direction == Direction::Alternate) {
      jobs.push_back({i % 2, spec.seeds[i]});
      continue;
    }
    for (std::size_t r = 0; r < routes.size(); ++r) jobs.push_back({r, spec.seeds[i]});
  }

  rep.episodes.resize(jobs.size());
  parallel_fill(rep.episodes, spec.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Route& route = routes[job.route];
    std::mt19937_64 rng(mix(job.seed, 11));
    double s0 = std::uniform_real_distribution<double>(0.0, route.length())(rng);
    expert::Simulator sim(maps.loop_map, env.truck, sim_config(spec, env), {}, mix(job.seed, 12));
    sim.place(start_state(route, s0, 0.0, 0.0, env.expert));
    auto pol = policy(route);
    deploy::EpisodeConfig cfg = episode_config(spec, env);
    cfg.distance = spec.distance;
    cfg.max_time = std::max(120.0, 3.0 * spec.distance / env.expert.cruise_speed);
    EpisodeRecord rec;
    rec.scenario = dirs[job.route] ? "ccw" : "cw";
    rec.seed = job.seed;
    copy_result(rec, deploy::run_executor(sim, route, *pol, cfg));
    rec.completion = std::clamp(rec.distance / spec.distance, 0.0, 1.0);
    rec.success = rec.completion >= 1.0 && rec.interventions == 0;
    return rec;
  });
  rep.aggregates = aggregate(rep.kind, rep.episodes);
  return rep;
}

std::map<std::string, std::vector<double>> disturbance_sites(const Route& route) {
  constexpr double kWindow = 30.0, kStraight = 1.0 / 1000.0, kCurve = 1.0 / 120.0;
  std::map<std::string, std::vector<double>> out{{"straight", {}}, {"left", {}}, {"right", {}}};
  for (double s = 0.0; s < route.length(); s += 1.0) {
    double lo = 1e9, hi = -1e9;
    for (double d = 0.0; d <= kWindow; d += 1.0) {
      double k = route.curvature(s + d);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    if (std::max(std::abs(lo), std::abs(hi)) < kStraight) out["straight"].push_back(s);
    else if (lo > kCurve) out["left"].push_back(s);
    else if (hi < -kCurve) out["right"].push_back(s);
  }
  return out;
}

BenchmarkReport run_disturbance(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy) {
  validate(spec);
  const auto& maps = maps_of(env);
  BenchmarkReport rep = make_report(spec, "loop_map");
  const std::vector<bool> dirs = directions(spec.direction);
  std::vector<Route> routes;
  std::vector<std::map<std::string, std::vector<double>>> sites;
  for (bool ccw : dirs) {
    routes.push_back(loop_route(maps.loop_map, ccw));
    sites.push_back(disturbance_sites(routes.back()));
    for (const auto& [cls, v] : sites.back())
      if (v.empty()) throw InvalidInput("loop map has no " + cls + " disturbance sites");
  }
  const char* classes[] = {"straight", "left", "right"};

  struct Job {
    const char* cls;
    std::uint64_t seed;
    int trial;
  };
  std::vector<Job> jobs;
  for (const char* cls : classes)
    for (std::uint64_t seed : spec.seeds)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({cls, seed, t});

  const double yaw_max = spec.max_yaw_deg * world::kPi / 180.0;
  const double head_tol = spec.safe_heading_deg * world::kPi / 180.0;
  rep.episodes.resize(jobs.size());
  parallel_fill(rep.episodes, spec.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    // Each trial draws from its own stream, so results do not depend on trial order.
    std::uint64_t key = mix(mix(job.seed, static_cast<std::uint64_t>(job.trial)), std::hash<std::string>{}(job.cls));
    std::mt19937_64 rng(key);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t r = static_cast<std::size_t>(job.trial) % routes.size();
    const Route& route = routes[r];
    const auto& candidates = sites[r].at(job.cls);
    double s0 = candidates[std::min(candidates.size() - 1, static_cast<std::size_t>(u(rng) * candidates.size()))];
    double lateral = spec.max_lateral * (2.0 * u(rng) - 1.0);
    double yaw = yaw_max * (2.0 * u(rng) - 1.0);

    expert::Simulator sim(maps.loop_map, env.truck, sim_config(spec, env), {}, mix(key, 3));
    sim.place(start_state(route, s0, lateral, yaw, env.expert));
    auto pol = policy(route);
    deploy::EpisodeConfig cfg = episode_config(spec, env);
    cfg.max_time = spec.recovery_window;
    cfg.interventions = false;
    const double dt = env.sim.physics_dt;

    EpisodeRecord rec;
    rec.scenario = job.cls;
    rec.seed = job.seed;
    rec.trial = job.trial;
    double held = 0.0;
    bool safe = false, crashed = false;
    auto on_tick = [&](const deploy::TickInfo& t) {
      if (t.collision || std::abs(t.lat_err) > 0.5 * route.width()) {
        crashed = true;
        return false;
      }
      held = std::abs(t.lat_err) <= spec.safe_lateral && std::abs(t.head_err) <= head_tol ? held + dt : 0.0;
      if (held >= spec.safe_hold - 1e-9) {
        safe = true;
        rec.recovery_time = t.state.time;
        return false;
      }
      return true;
    };
    deploy::EpisodeResult res = deploy::run_executor(sim, route, *pol, cfg, on_tick);
    copy_result(rec, std::move(res));
    rec.success = safe && !crashed && rec.collisions == 0;
    rec.completion = rec.success ? 1.0 : 0.0;
    return rec;
  });
  rep.aggregates = aggregate(rep.kind, rep.episodes);
  return rep;
}

BenchmarkReport run_navigation(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy) {
  validate(spec);
  const auto& maps = maps_of(env);
  const world::MineMap& net = maps.network_map;
  BenchmarkReport rep = make_report(spec, "network_map");
  if (net.intersections().empty()) throw InvalidInput("navigation needs a map with intersections");

  const std::size_t n_sites = net.sites().size();
  std::vector<Route> all = data::navigation_routes(net);
  if (all.size() < n_sites * (n_sites - 1))
    rep.notes.push_back(std::to_string(n_sites * (n_sites - 1) - all.size()) +
                        " site pairs skipped: no permitted route");
  std::vector<Route> routes;
  for (auto& r : all) {
    bool turning = std::any_of(r.turns().begin(), r.turns().end(),
                               [](const expert::RouteTurn& t) { return t.side != world::Turn::Straight; });
    if (r.length() >= spec.min_route_length && turning) routes.push_back(std::move(r));
  }
  if (routes.size() < all.size())
    rep.notes.push_back(std::to_string(all.size() - routes.size()) +
                        " routes skipped: shorter than the minimum length or without a turn");
  if (routes.empty()) throw InvalidInput("no navigation route meets the length and turn constraints");

  world::Vec2 centroid{0.0, 0.0};
  for (const auto& n : net.nodes()) centroid = centroid + n.position;
  centroid = centroid * (1.0 / static_cast<double>(net.nodes().size()));

  rep.episodes.resize(spec.seeds.size());
  parallel_fill(rep.episodes, spec.jobs, [&](std::size_t i) {
    const std::uint64_t seed = spec.seeds[i];
    std::mt19937_64 rng(mix(seed, 21));
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, routes.size() - 1)(rng);
    const Route& route = routes[pick];
    const double s0 = 5.0;
    expert::Simulator sim(net, env.truck, sim_config(spec, env), {}, mix(seed, 22));
    sim.place(start_state(route, s0, 0.0, 0.0, env.expert));
    auto pol = policy(route);
    deploy::EpisodeConfig cfg = episode_config(spec, env);
    cfg.max_time = 60.0 + 3.0 * route.length() / env.expert.cruise_speed;

    double reached = s0;
    std::vector<double> incidents;
    auto on_tick = [&](const deploy::TickInfo& t) {
      if (t.intervention || t.collision) incidents.push_back(t.route_s);
      else reached = std::max(reached, t.route_s);
      return true;
    };
    EpisodeRecord rec;
    rec.seed = seed;
    rec.scenario = "route" + std::to_string(pick);
    deploy::EpisodeResult res = deploy::run_executor(sim, route, *pol, cfg, on_tick);
    bool completed = res.completed;
    copy_result(rec, std::move(res));
    const double span = route.length() - cfg.end_margin - s0;
    rec.completion = completed ? 1.0 : std::clamp((reached - s0) / span, 0.0, 1.0);

    for (const auto& t : route.turns()) {
      IntersectionResult x;
      x.intersection = t.intersection;
      x.side = world::to_string(t.side);
      x.deflection_deg = t.deflection * 180.0 / world::kPi;
      world::Vec2 node = net.nodes()[net.intersections()[t.intersection].node].position;
      world::Vec2 dir = world::unit(route.line().heading_at(t.s_node));
      world::Vec2 rel = node - centroid;
      x.direction = rel.x * dir.y - rel.y * dir.x > 0.0 ? "ccw" : "cw";
      bool clean = std::none_of(incidents.begin(), incidents.end(),
                                [&](double s) { return s >= t.s_begin && s <= t.s_end; });
      x.passed = clean && reached >= t.s_end;
      rec.intersections.push_back(x);
    }
    rec.success = completed && rec.interventions == 0;
    return rec;
  });
  rep.aggregates = aggregate(rep.kind, rep.episodes);
  return rep;
}

BenchmarkReport run_task(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy) {
  switch (spec.kind) {
    case TaskKind::LaneStable: return run_lane_stable(spec, env, policy);
    case TaskKind::Disturbance: return run_disturbance(spec, env, policy);
    case TaskKind::Navigation: return run_navigation(spec, env, policy);
  }
  throw InvalidInput("unknown task");
}

double bootstrap_lower_bound(const std::vector<double>& a, const std::vector<double>& b, double confidence,
                             int resamples, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw InsufficientData("bootstrap needs two non-empty groups");
  if (!(confidence > 0.0 && confidence < 1.0) || resamples < 1) throw InvalidInput("bad bootstrap parameters");
  std::mt19937_64 rng(seed);
  auto resample_mean = [&](const std::vector<double>& v) {
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[pick(rng)];
    return s / static_cast<double>(v.size());
  };
  std::vector<double> diffs(resamples);
  for (double& d : diffs) d = resample_mean(a) - resample_mean(b);
  std::sort(diffs.begin(), diffs.end());
  std::size_t idx = static_cast<std::size_t>(std::floor((1.0 - confidence) * resamples));
  return diffs[std::min(idx, diffs.size() - 1)];
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

std::string prefix(const BenchmarkReport& r) {
  return std::string(to_string(r.kind)) + "," + deploy::to_string(r.mode) + "," + num(r.gnss_failure);
}

}  // namespace

void emit_report(const std::vector<BenchmarkReport>& reports, const std::filesystem::path& dir, const ReportMeta& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json doc;
  doc["schema"] = kReportSchema;
  doc["version"] = meta.version;
  doc["config_hash"] = meta.config_hash;
  doc["checkpoint"] = meta.checkpoint;
  doc["reports"] = json::array();

  std::ofstream eps = open_out(dir / "episodes.csv");
  std::ofstream xs = open_out(dir / "intersections.csv");
  std::ofstream evs = open_out(dir / "events.csv");
  eps << kEpisodesHeader << "\n";
  xs << kIntersectionsHeader << "\n";
  evs << kEventsHeader << "\n";

  for (std::size_t ri = 0; ri < reports.size(); ++ri) {
    const BenchmarkReport& r = reports[ri];
    json jr;
    jr["task"] = to_string(r.kind);
    jr["mode"] = deploy::to_string(r.mode);
    jr["map"] = r.map_id;
    jr["gnss_failure"] = r.gnss_failure;
    jr["seeds"] = r.seeds;
    jr["notes"] = r.notes;
    jr["aggregates"] = r.aggregates;
    json jeps = json::array();
    for (std::size_t ei = 0; ei < r.episodes.size(); ++ei) {
      const EpisodeRecord& e = r.episodes[ei];
      json je{{"scenario", e.scenario},       {"seed", e.seed},
              {"trial", e.trial},             {"collisions", e.collisions},
              {"interventions", e.interventions}, {"gnss_losses", e.gnss_losses},
              {"success", e.success},         {"completion", e.completion},
              {"distance", e.distance},       {"recovery_time", e.recovery_time}};
      json jx = json::array();
      for (const auto& x : e.intersections) {
        jx.push_back({{"intersection", x.intersection}, {"side", x.side}, {"direction", x.direction},
                      {"deflection_deg", x.deflection_deg}, {"passed", x.passed}});
        xs << prefix(r) << ',' << e.scenario << ',' << e.seed << ',' << x.intersection << ',' << x.side << ','
           << x.direction << ',' << num(x.deflection_deg) << ',' << (x.passed ? 1 : 0) << "\n";
      }
      je["intersections"] = jx;
      jeps.push_back(std::move(je));
      eps << prefix(r) << ',' << e.scenario << ',' << e.seed << ',' << e.trial << ',' << e.collisions << ','
          << e.interventions << ',' << e.gnss_losses << ',' << (e.success ? 1 : 0) << ',' << num(e.completion) << ','
          << num(e.distance) << ',' << num(e.recovery_time) << "\n";
      for (const auto& ev : e.events)
        evs << prefix(r) << ',' << e.scenario << ',' << e.seed << ',' << e.trial << ',' << ev.kind << ','
            << num(ev.s) << ',' << num(ev.t) << ',' << num(ev.x) << ',' << num(ev.y) << "\n";
      if (!e.trajectory.empty()) {
        std::string name = "traj_" + std::to_string(ri) + "_" + std::string(to_string(r.kind)) + "_" +
                           deploy::to_string(r.mode) + "_" + e.scenario + "_" + std::to_string(e.seed) + "_" +
                           std::to_string(e.trial) + ".csv";
        deploy::write_trajectory_csv(dir / name, e.trajectory);
      }
    }
    jr["episodes"] = std::move(jeps);
    doc["reports"].push_back(std::move(jr));
  }

  std::ofstream js = open_out(dir / "report.json");
  js << doc.dump(2) << "\n";
  if (!js || !eps || !xs || !evs) throw IoError("write failed under " + dir.string());
}

}  // namespace minehaul::bench
