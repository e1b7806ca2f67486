#include "minehaul/cli/pipeline.hpp"

#include <fstream>

#include <json.hpp>

#include "minehaul/data/dataset_io.hpp"
#include "minehaul/errors.hpp"
#include "minehaul/nn/checkpoint.hpp"
#include "minehaul/world/map_io.hpp"

namespace minehaul::cli {

using nlohmann::json;

namespace {

void ensure_dir(const Layout& out) {
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw IoError("cannot create " + out.dir.string() + ": " + ec.message());
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  os << j.dump(2) << "\n";
  if (!os) throw IoError("write failed: " + p.string());
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("missing input " + p.string());
}

}  // namespace

void write_config(const RunConfig& cfg, const Layout& out) {
  ensure_dir(out);
  std::ofstream os(out.config());
  if (!os) throw IoError("cannot write " + out.config().string());
  os << "# config_hash " << config_hash(cfg) << "\n" << to_ini(cfg);
}

void map_gen(const RunConfig& cfg, const Layout& out) {
  ensure_dir(out);
  json files = json::array();
  if (cfg.maps != "network") {
    world::save_map(world::build_loop_map(), out.dir / "loop_map.json");
    files.push_back("loop_map.json");
  }
  if (cfg.maps != "loop") {
    world::save_map(world::build_network_map(), out.dir / "network_map.json");
    files.push_back("network_map.json");
  }
  write_json(out.dir / "maps.manifest.json", {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"files", files}});
}

CollectSummary collect(const RunConfig& raw, const Layout& out) {
  RunConfig cfg = raw.resolved();
  ensure_dir(out);
  world::TestMaps maps = world::build_test_maps();
  data::DemonstrationSet demos = data::collect_demonstrations(maps, cfg.collect, cfg.seed);
  data::write_demonstrations(out.demos(), demos);
  data::Manifest m;
  m.kind = "demonstrations";
  m.seed = cfg.seed;
  m.config_hash = training_hash(cfg);
  m.count = data::frame_count(demos);
  data::write_manifest(data::manifest_path(out.demos()), m);
  return {demos.size(), m.count};
}

FilterSummary filter(const RunConfig& raw, const Layout& out, std::optional<fs::path> input) {
  RunConfig cfg = raw.resolved();
  ensure_dir(out);
  fs::path in = input.value_or(out.demos());
  require_file(in);
  data::DemonstrationSet demos = data::read_demonstrations(in);
  FilterSummary s;
  s.thresholds = data::fit_thresholds(demos, cfg.confidence);
  data::DemonstrationSet kept = data::filter_bias(demos, s.thresholds, &s.report);
  data::write_demonstrations(out.filtered(), kept);
  data::Manifest m;
  m.kind = "demonstrations";
  m.seed = cfg.seed;
  m.config_hash = training_hash(cfg);
  m.thresholds = s.thresholds;
  m.count = data::frame_count(kept);
  data::write_manifest(data::manifest_path(out.filtered()), m);
  write_json(out.filter_report(), {{"config_hash", config_hash(cfg)},
                                   {"seed", cfg.seed},
                                   {"confidence", cfg.confidence},
                                   {"steer_low", s.thresholds.steer_low},
                                   {"steer_up", s.thresholds.steer_up},
                                   {"throttle_up", s.thresholds.throttle_up},
                                   {"total", s.report.total},
                                   {"removed", s.report.removed},
                                   {"removed_steer", s.report.removed_steer},
                                   {"removed_throttle", s.report.removed_throttle},
                                   {"removed_fraction", s.report.removed_fraction()}});
  return s;
}

TrainSummary train(const RunConfig& raw, const Layout& out, std::optional<fs::path> input,
                   const std::function<void(const objectives::TraceRow&)>& on_epoch) {
  RunConfig cfg = raw.resolved();
  ensure_dir(out);
  fs::path in = input.value_or(out.filtered());
  require_file(in);
  std::vector<data::TrainingSample> samples =
      data::build_lookahead_labels(data::read_demonstrations(in), cfg.K, cfg.spacing);
  model::FusionPlanner planner(cfg.model, cfg.seed);
  objectives::TrainConfig tc = cfg.train;
  tc.checkpoint = out.checkpoint();
  tc.config_hash = training_hash(cfg);
  TrainSummary s;
  s.samples = samples.size();
  s.result = objectives::train(planner, samples, tc, on_epoch);
  objectives::write_trace_csv(out.trace(), s.result.trace);
  return s;
}

model::FusionPlanner load_planner(const RunConfig& raw, const fs::path& checkpoint, bool force) {
  RunConfig cfg = raw.resolved();
  require_file(checkpoint);
  json meta = nn::read_checkpoint_meta(checkpoint.string());
  std::string stored = meta.value("config_hash", std::string());
  if (!force && stored != training_hash(cfg))
    throw ConfigError("checkpoint " + checkpoint.string() + " was trained with config " + stored +
                      ", current config is " + training_hash(cfg) + " (use --force to override)");
  return model::FusionPlanner::from_checkpoint(checkpoint.string());
}

EvalSummary eval(const RunConfig& raw, const Layout& out, const model::FusionPlanner& planner) {
  RunConfig cfg = raw.resolved();
  ensure_dir(out);
  world::TestMaps maps = world::build_test_maps();
  expert::Route route = expert::Route::circuit(maps.loop_map, 0, true);
  expert::Simulator sim(maps.loop_map, cfg.truck, cfg.sim, {}, cfg.seed);
  world::TruckState st;
  st.position = route.line().point_at(0.0);
  st.heading = route.line().heading_at(0.0);
  st.speed = expert::profile_speed(route, 0.0, cfg.expert);
  sim.place(st);
  deploy::PlannerPolicy policy(planner);
  deploy::EpisodeConfig ec;
  ec.mode = cfg.mode;
  ec.distance = cfg.bench.distance;
  ec.max_time = std::max(120.0, 3.0 * ec.distance / cfg.expert.cruise_speed);
  ec.hlc_activation = cfg.hlc_activation;
  ec.expert = cfg.expert;
  EvalSummary s{deploy::run_executor(sim, route, policy, ec)};
  deploy::write_trajectory_csv(out.trajectory(), s.result.trajectory);
  deploy::write_events_jsonl(out.events(), s.result.events);
  const auto& r = s.result;
  write_json(out.eval(), {{"config_hash", config_hash(cfg)},
                          {"seed", cfg.seed},
                          {"mode", deploy::to_string(cfg.mode)},
                          {"completed", r.completed},
                          {"progress", r.progress},
                          {"collisions", r.collisions},
                          {"interventions", r.interventions},
                          {"gnss_losses", r.gnss_losses},
                          {"safety_stop", r.failed},
                          {"inferences", r.inferences},
                          {"physics_steps", r.physics_steps}});
  return s;
}

bench::BenchmarkReport run_bench(const RunConfig& raw, const Layout& out, const bench::PolicyFactory& policy,
                                 const std::string& checkpoint) {
  RunConfig cfg = raw.resolved();
  bench::BenchEnv env;
  world::TestMaps maps = world::build_test_maps();
  env.maps = &maps;
  env.truck = cfg.truck;
  env.sim = cfg.sim;
  env.expert = cfg.expert;
  bench::BenchmarkReport rep = bench::run_task(cfg.bench, env, policy);
  bench::emit_report({rep}, out.bench(), {config_hash(cfg), checkpoint, "1"});
  return rep;
}

}  // namespace minehaul::cli
