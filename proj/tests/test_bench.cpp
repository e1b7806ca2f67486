#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "minehaul/bench/benchmark.hpp"
#include "minehaul/errors.hpp"

using namespace minehaul;
using namespace minehaul::bench;

namespace {

const world::TestMaps& maps() {
  static const world::TestMaps m = world::build_test_maps();
  return m;
}

BenchEnv env() {
  BenchEnv e;
  e.maps = &maps();
  return e;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("minehaul_bench_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST_CASE("lane-stable: the scripted expert runs both directions without incident") {
  TaskSpec spec;
  spec.kind = TaskKind::LaneStable;
  spec.seeds = {1, 2};
  spec.mode = FusionMode::Evidential;
  BenchmarkReport r = run_lane_stable(spec, env(), expert_factory());
  REQUIRE(r.episodes.size() == 4);
  for (const auto& e : r.episodes) {
    CHECK(e.collisions == 0);
    CHECK(e.interventions == 0);
    CHECK(e.completion == 1.0);
    CHECK(e.success);
  }
  CHECK(r.aggregates.at("success_rate[ccw]") == 1.0);
  CHECK(r.aggregates.at("success_rate[cw]") == 1.0);
  CHECK(r.aggregates.at("interventions_per_1500m") == 0.0);
}

TEST_CASE("disturbance: sites cover every class and the expert recovers") {
  auto sites = disturbance_sites(expert::Route::circuit(maps().loop_map, 0, true));
  for (const char* c : {"straight", "left", "right"}) CHECK(sites.at(c).size() > 20);

  TaskSpec spec;
  spec.kind = TaskKind::Disturbance;
  spec.seeds = {7};
  spec.trials = 30;
  BenchmarkReport r = run_disturbance(spec, env(), expert_factory());
  REQUIRE(r.episodes.size() == 90);
  for (const char* c : {"straight", "left", "right"}) CHECK(r.aggregates.at(std::string("success_rate[") + c + "]") >= 0.95);
  CHECK(r.aggregates.at("success_rate") >= 0.95);

  SUBCASE("zero perturbation succeeds after exactly the hold time") {
    spec.max_lateral = 0.0;
    spec.max_yaw_deg = 0.0;
    spec.trials = 10;
    spec.seeds = {1, 2, 3};
    BenchmarkReport z = run_disturbance(spec, env(), expert_factory());
    for (const auto& e : z.episodes) {
      CHECK(e.success);
      CHECK(e.recovery_time == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("per-class rates are exchangeable under trial reordering") {
    TaskSpec swapped = spec;
    swapped.seeds = {7};
    BenchmarkReport a = run_disturbance(swapped, env(), expert_factory());
    std::vector<EpisodeRecord> rev(a.episodes.rbegin(), a.episodes.rend());
    auto ra = aggregate(TaskKind::Disturbance, a.episodes), rb = aggregate(TaskKind::Disturbance, rev);
    for (const auto& [k, v] : ra) CHECK(std::abs(v - rb.at(k)) < 1e-12);
    CHECK(a.aggregates == r.aggregates);
  }
}

TEST_CASE("disturbance: spec validation") {
  TaskSpec spec;
  spec.kind = TaskKind::Disturbance;
  spec.seeds = {1};
  spec.trials = 29;
  CHECK_THROWS_AS(run_disturbance(spec, env(), expert_factory()), InvalidInput);
  spec.seeds = {};
  CHECK_THROWS_AS(validate(spec), InvalidInput);
  TaskSpec lane;
  lane.seeds = {1};
  lane.distance = 900.0;
  CHECK_THROWS_AS(validate(lane), InvalidInput);
}

TEST_CASE("navigation: the expert passes every intersection on long turning routes") {
  TaskSpec spec;
  spec.kind = TaskKind::Navigation;
  spec.seeds = {1, 2, 3};
  BenchmarkReport r = run_navigation(spec, env(), expert_factory());
  REQUIRE(r.episodes.size() == 3);
  int turning = 0;
  for (const auto& e : r.episodes) {
    CHECK(e.collisions == 0);
    CHECK(e.interventions == 0);
    CHECK(e.completion == 1.0);
    CHECK(!e.intersections.empty());
    for (const auto& x : e.intersections) {
      CHECK(x.passed);
      turning += x.side != "straight";
    }
  }
  CHECK(turning >= 3);
  CHECK(r.aggregates.at("pass_rate") == 1.0);
}

TEST_CASE("bootstrap lower bound") {
  std::vector<double> hi(100, 1.0), lo(100, 0.0);
  CHECK(bootstrap_lower_bound(hi, lo, 0.9, 500, 1) == 1.0);
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(i % 4 != 0), b.push_back(i % 4 == 0);  // 0.75 vs 0.25
  double lb = bootstrap_lower_bound(a, b, 0.9, 2000, 3);
  CHECK(lb > 0.35);
  CHECK(lb < 0.5);
  CHECK(bootstrap_lower_bound(a, a, 0.9, 2000, 3) < 0.0);
  CHECK_THROWS_AS(bootstrap_lower_bound({}, a, 0.9, 10, 1), InsufficientData);
}

TEST_CASE("emit_report: empty set, round trip and determinism") {
  auto empty = scratch("empty");
  emit_report({}, empty, {"abc", "", "1"});
  for (const char* f : {"episodes.csv", "intersections.csv", "events.csv"}) CHECK(csv_rows(empty / f).empty());
  auto doc = nlohmann::json::parse(slurp(empty / "report.json"));
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["reports"].empty());

  TaskSpec spec;
  spec.kind = TaskKind::Disturbance;
  spec.seeds = {4, 5};
  spec.trials = 15;
  spec.keep_trajectories = true;
  BenchmarkReport r = run_disturbance(spec, env(), expert_factory());
  TaskSpec nav;
  nav.kind = TaskKind::Navigation;
  nav.seeds = {9};
  BenchmarkReport n = run_navigation(nav, env(), expert_factory());

  auto dir = scratch("run1");
  emit_report({r, n}, dir, {"cafe", "ckpt.bin", "1"});
  doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc["config_hash"] == "cafe");
  CHECK(doc["reports"][0]["seeds"] == std::vector<std::uint64_t>{4, 5});

  // aggregate success recomputed from the per-episode CSV
  double sum = 0.0;
  int count = 0;
  for (const auto& row : csv_rows(dir / "episodes.csv"))
    if (row[0] == "disturbance") sum += std::stod(row[9]), ++count;
  CHECK(count == 90);
  CHECK(std::abs(sum / count - doc["reports"][0]["aggregates"]["success_rate"].get<double>()) < 1e-9);
  CHECK(csv_rows(dir / "intersections.csv").size() == n.episodes[0].intersections.size());
  int traj = 0;
  for (const auto& f : std::filesystem::directory_iterator(dir)) traj += f.path().filename().string().rfind("traj_", 0) == 0;
  CHECK(traj == 90);

  BenchmarkReport r2 = run_disturbance(spec, env(), expert_factory());
  auto dir2 = scratch("run2");
  emit_report({r2, n}, dir2, {"cafe", "ckpt.bin", "1"});
  for (const char* f : {"report.json", "episodes.csv", "events.csv"}) CHECK(slurp(dir / f) == slurp(dir2 / f));

  CHECK_THROWS_AS(emit_report({}, "/proc/minehaul_no_such_dir"), IoError);
}
