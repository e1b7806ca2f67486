// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria. Usage: acceptance [workdir] [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "minehaul/bench/benchmark.hpp"
#include "minehaul/cli/config.hpp"
#include "minehaul/cli/pipeline.hpp"
#include "minehaul/data/dataset_io.hpp"
#include "minehaul/data/filter.hpp"
#include "minehaul/deploy/executor.hpp"
#include "minehaul/deploy/fusion.hpp"
#include "minehaul/expert/simulation.hpp"
#include "minehaul/objectives/gradcheck_suite.hpp"
#include "minehaul/objectives/losses.hpp"
#include "support.hpp"

using namespace minehaul;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Clock {
  std::chrono::steady_clock::time_point wall = std::chrono::steady_clock::now();
  std::clock_t cpu = std::clock();
  double wall_s() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count(); }
  double cpu_s() const { return static_cast<double>(std::clock() - cpu) / CLOCKS_PER_SEC; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// -log Student-t(y; loc, scale, df), written out from the density.
double student_t_nll(double y, double loc, double scale, double df) {
  double z = (y - loc) / scale;
  return -(std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI) - std::log(scale) -
           (df + 1) / 2 * std::log1p(z * z / df));
}

Verdict gradients() {
  Clock clk;
  auto cases = objectives::run_gradcheck_suite(1, 1e-4, 64);
  double secs = clk.wall_s();
  bool ok = secs < 60.0 && !cases.empty();
  double worst = 0.0;
  std::string bad;
  for (const auto& c : cases) {
    worst = std::max(worst, c.max_rel_error);
    if (!c.passed || c.probes < 64 || !(c.max_rel_error < 1e-4)) {
      ok = false;
      bad += " " + c.name;
    }
  }
  return {ok, fmt("%zu cases, worst rel err %.2e, %.2f s%s%s", cases.size(), worst, secs, bad.empty() ? "" : "; failed:",
                  bad.c_str())};
}

Verdict nll_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    model::NigParams p;
    p.gamma = 4 * u(rng) - 2;
    p.nu = std::exp(6 * u(rng) - 3);
    p.alpha = 1 + std::exp(6 * u(rng) - 3);
    p.beta = std::exp(6 * u(rng) - 3);
    double y = p.gamma + (4 * u(rng) - 2) * std::sqrt(p.beta);
    double scale = std::sqrt(p.beta * (1 + p.nu) / (p.nu * p.alpha));
    double d = std::abs(objectives::evidential_nll(y, p) - student_t_nll(y, p.gamma, scale, 2 * p.alpha));
    worst = std::max(worst, d);
  }
  return {worst < 1e-9, fmt("100 draws, max |diff| %.2e", worst)};
}

Verdict fusion_identities() {
  using deploy::BinEntry;
  using deploy::FusionMode;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](std::size_t c) { return c == 0 ? 2 * u(rng) - 1 : u(rng); };
  double eq_worst = 0.0, single_worst = 0.0;
  int hull_violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 8);
    std::vector<BinEntry> bin(n);
    std::array<double, kChannels> lam;
    for (auto& l : lam) l = std::exp(20 * u(rng) - 10);
    for (auto& e : bin)
      for (std::size_t c = 0; c < kChannels; ++c) e.value[c] = draw(c), e.confidence[c] = lam[c];
    ControlCommand ev = deploy::fuse_entries(bin, FusionMode::Evidential);
    ControlCommand un = deploy::fuse_entries(bin, FusionMode::Uniform);
    for (std::size_t c = 0; c < kChannels; ++c) eq_worst = std::max(eq_worst, std::abs(ev[c] - un[c]));

    for (auto& e : bin)
      for (std::size_t c = 0; c < kChannels; ++c) e.confidence[c] = std::exp(30 * u(rng) - 15);
    for (FusionMode m : {FusionMode::Evidential, FusionMode::Uniform}) {
      ControlCommand f = deploy::fuse_entries(bin, m);
      for (std::size_t c = 0; c < kChannels; ++c) {
        double lo = bin[0].value[c], hi = lo;
        for (const auto& e : bin) lo = std::min(lo, e.value[c]), hi = std::max(hi, e.value[c]);
        if (f[c] < lo || f[c] > hi) ++hull_violations;
      }
    }

    // single-entry bin through the buffer: the fresh k = 0 prediction is the only entry
    model::EvidentialPrediction p;
    p.K = 1;
    for (std::size_t c = 0; c < kChannels; ++c)
      p.channels[c] = {model::NigParams{draw(c), std::exp(2 * u(rng) - 1), 1.5 + u(rng), std::exp(2 * u(rng) - 1)}};
    deploy::FusionBuffer buf(1);
    double s = 100 * u(rng);
    buf.ingest(s, p);
    long d = deploy::FusionBuffer::bin_index(s);
    ControlCommand inst = deploy::fuse(buf, d, FusionMode::Instantaneous, p);
    for (FusionMode m : {FusionMode::Uniform, FusionMode::Evidential}) {
      ControlCommand f = deploy::fuse(buf, d, m, p);
      for (std::size_t c = 0; c < kChannels; ++c) single_worst = std::max(single_worst, std::abs(f[c] - inst[c]));
    }
  }
  bool ok = eq_worst <= 1e-12 && single_worst == 0.0 && hull_violations == 0;
  return {ok, fmt("1e4 bins: equal-confidence max diff %.1e, single-entry max diff %.1e, hull violations %d",
                  eq_worst, single_worst, hull_violations)};
}

Verdict task_uncertainty() {
  Clock clk;
  int correct = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = support::two_task_experiment(seed, 0.01, 0.3);
    if (s[0] < s[1]) ++correct;
  }
  double secs = clk.wall_s();
  return {correct == 10 && secs < 120.0, fmt("sigma ordering correct in %d/10 seeds, %.1f s", correct, secs)};
}

struct Pipeline {
  cli::RunConfig cfg;
  cli::Layout out;
  bool collected = false;
  bool trained = false;
  double train_cpu = 0.0;
  cli::FilterSummary filter;
};

void ensure_collected(Pipeline& p) {
  if (p.collected) return;
  fs::create_directories(p.out.dir);
  cli::write_config(p.cfg, p.out);
  auto c = cli::collect(p.cfg, p.out);
  std::printf("  collected %zu frames in %zu episodes\n", c.frames, c.episodes);
  p.filter = cli::filter(p.cfg, p.out);
  p.collected = true;
}

Verdict data_pipeline(Pipeline& p) {
  ensure_collected(p);
  auto demos = data::read_demonstrations(p.out.filtered());
  const auto& thr = p.filter.thresholds;
  std::size_t frames = 0, outside = 0;
  for (const auto& d : demos)
    for (const auto& f : d.frames) {
      ++frames;
      bool in = f.label[0] > thr.steer_low && f.label[0] < thr.steer_up && f.label[1] < thr.throttle_up;
      if (!in) ++outside;
    }
  data::FilterReport again;
  auto twice = data::filter_bias(demos, thr, &again);
  bool idempotent = again.removed == 0 && twice == demos;
  double frac = p.filter.report.removed_fraction();
  bool ok = frames > 0 && outside == 0 && frac >= 0.005 && frac <= 0.02 && idempotent;
  return {ok, fmt("%zu kept, %zu outside bounds, removed %.3f%%, idempotent %s", frames, outside, 100 * frac,
                  idempotent ? "yes" : "no")};
}

Verdict expert_sanity() {
  Clock clk;
  world::TestMaps maps = world::build_test_maps();
  std::string detail;
  bool ok = true;
  for (bool forward : {true, false}) {
    expert::Route route = expert::Route::circuit(maps.loop_map, 0, forward);
    expert::Simulator sim(maps.loop_map, {}, {}, {}, forward ? 11 : 12);
    world::TruckState start;  // at rest on the route start, facing along it
    start.position = route.line().point_at(0.0);
    start.heading = route.line().heading_at(0.0);
    sim.place(start);
    deploy::ExpertPolicy policy(route);
    deploy::EpisodeConfig ec;
    ec.distance = route.length();
    ec.max_time = 900.0;
    ec.log_trajectory = false;
    double vmax = 0.0;
    auto res = deploy::run_executor(sim, route, policy, ec, [&](const deploy::TickInfo& t) {
      vmax = std::max(vmax, t.state.speed);
      return true;
    });
    double kmh = vmax * 3.6;
    bool lap = res.completed && res.collisions == 0 && res.interventions == 0 && !res.failed && kmh <= 21.0;
    ok = ok && lap;
    detail += fmt("%s %.0f m: %d collisions, %d interventions, max %.2f km/h; ", forward ? "ccw" : "cw", res.progress,
                  res.collisions, res.interventions, kmh);
  }
  double secs = clk.wall_s();
  ok = ok && secs < 30.0;
  return {ok, detail + fmt("%.1f s", secs)};
}

bench::BenchEnv bench_env(const cli::RunConfig& cfg, const world::TestMaps& maps) {
  bench::BenchEnv env;
  env.maps = &maps;
  env.truck = cfg.truck;
  env.sim = cfg.sim;
  env.expert = cfg.expert;
  return env;
}

void ensure_trained(Pipeline& p) {
  ensure_collected(p);
  if (p.trained) return;
  Clock clk;
  auto t = cli::train(p.cfg, p.out, std::nullopt, [](const objectives::TraceRow& r) {
    std::printf("  epoch %d loss %.4f\n", r.epoch, r.total);
    std::fflush(stdout);
  });
  p.train_cpu = clk.cpu_s();
  std::printf("  trained on %zu samples, %.1f s CPU\n", t.samples, p.train_cpu);
  p.trained = true;
}

Verdict lane_stable(Pipeline& p) {
  ensure_trained(p);
  cli::RunConfig cfg = p.cfg.resolved();
  model::FusionPlanner planner = cli::load_planner(cfg, p.out.checkpoint(), false);
  world::TestMaps maps = world::build_test_maps();
  bench::BenchEnv env = bench_env(cfg, maps);
  bench::TaskSpec spec = cfg.bench;
  spec.kind = bench::TaskKind::LaneStable;
  spec.direction = bench::Direction::Alternate;
  spec.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) spec.seeds.push_back(s);
  spec.gnss_failure = 0.0;

  Clock clk;
  std::map<deploy::FusionMode, std::map<std::string, double>> agg;
  std::string detail;
  for (auto m : {deploy::FusionMode::Evidential, deploy::FusionMode::Uniform, deploy::FusionMode::Instantaneous}) {
    spec.mode = m;
    agg[m] = bench::run_lane_stable(spec, env, bench::planner_factory(planner)).aggregates;
    detail += fmt("%s: completion %.3f, %.2f int/1500m, %.2f events; ", deploy::to_string(m),
                  agg[m]["mean_completion"], agg[m]["interventions_per_1500m"], agg[m]["mean_events"]);
    std::printf("  %s\n", detail.c_str());
    std::fflush(stdout);
  }
  double eval_cpu = clk.cpu_s();
  spec.mode = deploy::FusionMode::Evidential;
  spec.gnss_failure = 0.04;
  auto gnss = bench::run_lane_stable(spec, env, bench::planner_factory(planner)).aggregates;

  const auto& ev = agg[deploy::FusionMode::Evidential];
  const auto& un = agg[deploy::FusionMode::Uniform];
  const auto& in = agg[deploy::FusionMode::Instantaneous];
  bool quality = ev.at("mean_completion") >= 0.9 && ev.at("interventions_per_1500m") <= 3.0;
  bool order = ev.at("mean_interventions") <= un.at("mean_interventions") && un.at("mean_interventions") <= in.at("mean_interventions");
  bool gnss_ok = gnss.at("mean_events") >= ev.at("mean_events");
  bool budget = p.train_cpu < 1800.0 && eval_cpu < 600.0;
  detail += fmt("gnss 4%%: %.2f events vs %.2f; train %.0f s CPU, eval %.0f s CPU", gnss.at("mean_events"), ev.at("mean_events"),
                p.train_cpu, eval_cpu);
  detail += fmt(" [quality %s, ordering %s, gnss %s, budget %s]", quality ? "ok" : "no", order ? "ok" : "no",
                gnss_ok ? "ok" : "no", budget ? "ok" : "no");
  return {quality && order && gnss_ok && budget, detail};
}

Verdict disturbance(Pipeline& p) {
  ensure_trained(p);
  cli::RunConfig cfg = p.cfg.resolved();
  model::FusionPlanner planner = cli::load_planner(cfg, p.out.checkpoint(), false);
  world::TestMaps maps = world::build_test_maps();
  bench::BenchEnv env = bench_env(cfg, maps);
  bench::TaskSpec spec = cfg.bench;
  spec.kind = bench::TaskKind::Disturbance;
  spec.seeds = {1, 2};
  spec.trials = 30;

  std::map<deploy::FusionMode, std::vector<double>> success;
  std::string detail;
  for (auto m : {deploy::FusionMode::Evidential, deploy::FusionMode::Uniform, deploy::FusionMode::Instantaneous}) {
    spec.mode = m;
    auto rep = bench::run_disturbance(spec, env, bench::planner_factory(planner));
    for (const auto& e : rep.episodes) success[m].push_back(e.success ? 1.0 : 0.0);
    detail += fmt("%s %.3f (n=%zu); ", deploy::to_string(m), rep.aggregates["success_rate"], success[m].size());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  double e = mean(success[deploy::FusionMode::Evidential]), u = mean(success[deploy::FusionMode::Uniform]),
         i = mean(success[deploy::FusionMode::Instantaneous]);
  double lb = bench::bootstrap_lower_bound(success[deploy::FusionMode::Evidential],
                                           success[deploy::FusionMode::Instantaneous], 0.90, 10000, 99);
  std::size_t n = success[deploy::FusionMode::Instantaneous].size();
  bool ok = n >= 90 && e >= u && u > i && lb > 0.0;
  return {ok, detail + fmt("bootstrap 90%% lower bound of evidential - instantaneous %.3f", lb)};
}

Verdict determinism(const fs::path& work) {
  std::vector<std::string> files = {"demos.jsonl", "filtered.jsonl", "filter_report.json", "trace.csv", "model.ckpt",
                                    "bench/report.json", "bench/episodes.csv", "bench/events.csv"};
  std::vector<std::string> digests[2];
  for (int run = 0; run < 2; ++run) {
    cli::RunConfig cfg;
    cfg.seed = 5;
    cfg.collect.minutes = 3.0;
    cfg.train.epochs = 2;
    cfg.bench.kind = bench::TaskKind::LaneStable;
    cfg.bench.direction = bench::Direction::Alternate;
    cfg.bench.distance = 1000.0;
    cfg.bench.gnss_failure = 0.04;
    cfg.bench_seeds = 2;
    cfg.bench.keep_trajectories = true;
    cli::Layout out{work};  // same directory both times, wiped in between
    fs::remove_all(out.dir);
    fs::create_directories(out.dir);
    cli::write_config(cfg, out);
    cli::collect(cfg, out);
    cli::filter(cfg, out);
    cli::train(cfg, out);
    model::FusionPlanner planner = cli::load_planner(cfg, out.checkpoint(), false);
    cli::run_bench(cfg, out, bench::planner_factory(planner), out.checkpoint().string());
    for (const auto& f : files) digests[run].push_back(slurp(out.dir / f));
    for (const auto& entry : fs::directory_iterator(out.bench()))
      if (entry.path().filename().string().rfind("traj_", 0) == 0) digests[run].push_back(slurp(entry.path()));
  }
  bool same = digests[0] == digests[1];
  std::string detail = fmt("%zu files compared", digests[0].size());
  for (std::size_t k = 0; k < files.size() && k < digests[0].size(); ++k) {
    if (digests[0][k].empty()) same = false, detail += " empty:" + files[k];
    if (digests[0][k] != digests[1][k]) detail += " differs:" + files[k];
  }
  return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::stoi(argv[i]));
  fs::create_directories(work);

  Pipeline pipe;
  pipe.cfg.seed = 1;
  pipe.out = cli::Layout{work / "pipeline"};

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradients},
      {"evidential NLL oracle", nll_oracle},
      {"fusion identities", fusion_identities},
      {"task-uncertainty adaptation", task_uncertainty},
      {"data pipeline", [&] { return data_pipeline(pipe); }},
      {"expert sanity", expert_sanity},
      {"trained planner lane-stable", [&] { return lane_stable(pipe); }},
      {"disturbance ordering", [&] { return disturbance(pipe); }},
      {"determinism", [&] { return determinism(work / "determinism"); }},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %d %s: %s | %s\n", id, v.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
