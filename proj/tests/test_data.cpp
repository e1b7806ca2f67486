#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "minehaul/data/collect.hpp"
#include "minehaul/data/dataset_io.hpp"
#include "minehaul/data/filter.hpp"
#include "minehaul/data/labels.hpp"
#include "minehaul/errors.hpp"
#include "minehaul/world/sensors.hpp"

using namespace minehaul;
using namespace minehaul::data;
namespace fs = std::filesystem;

namespace {

// Synthetic demonstration: frames every `ds` metres with commands from `f(s)`.
template <class F>
Demonstration synthetic(int episode, std::size_t n, double ds, F f) {
  Demonstration d;
  d.episode = episode;
  for (std::size_t i = 0; i < n; ++i) {
    DemoFrame fr;
    fr.s = 3.0 + i * ds;
    fr.t = 0.1 * i;
    fr.label = f(fr.s);
    fr.obs.scan.beams = 4;
    fr.obs.scan.fov = 1.5 * world::kPi;
    fr.obs.scan.ranges = {10.0, 20.0, 120.0, 6.4};
    fr.obs.scan.valid = {1, 1, 0, 1};
    fr.obs.scan.timestamp = fr.t;
    fr.obs.gnss.position = {fr.s, -2.5};
    fr.obs.gnss.valid = true;
    fr.obs.gnss.timestamp = fr.t;
    fr.obs.speed = 5.5;
    d.frames.push_back(fr);
  }
  return d;
}

world::MineMap corridor(double half_length = 500.0) {
  world::Edge e;
  e.from = 0;
  e.to = 1;
  e.width = 12.0;
  e.centerline = world::Polyline({{-half_length, 0.0}, {half_length, 0.0}});
  return world::MineMap("corridor", {world::Node{{-half_length, 0.0}}, world::Node{{half_length, 0.0}}}, {e}, {0, 1});
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("quantile uses linear interpolation between order statistics") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({0.0, 10.0}, 0.25) == 2.5);
  CHECK(quantile({7.0}, 0.9) == 7.0);
  CHECK(quantile({1.0, 2.0, 3.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 2.0, 3.0}, 1.0) == 3.0);
}

TEST_CASE("fit_thresholds on uniform steering") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 1.0);
  DemonstrationSet demos{synthetic(0, 200000, 0.5, [&](double) { return make_command(u(rng), t(rng), 0, 0); })};
  FilterThresholds thr = fit_thresholds(demos, 0.99);
  CHECK(thr.steer_low == doctest::Approx(-0.99).epsilon(0.005));
  CHECK(thr.steer_up == doctest::Approx(0.99).epsilon(0.005));
  CHECK(thr.throttle_up == doctest::Approx(0.995).epsilon(0.005));
  CHECK_THROWS_AS(fit_thresholds(demos, 0.9), InvalidInput);
  CHECK_THROWS_AS(fit_thresholds(demos, 1.0), InvalidInput);
  DemonstrationSet small{synthetic(0, 999, 0.5, [](double) { return make_command(0, 0, 0, 0); })};
  CHECK_THROWS_AS(fit_thresholds(small, 0.99), InsufficientData);
}

TEST_CASE("all-zero steering gives degenerate bounds that reject any nonzero steering") {
  DemonstrationSet demos{synthetic(0, 2000, 0.5, [](double s) { return make_command(0.0, std::fmod(s, 1.0), 0, 0); })};
  FilterThresholds thr = fit_thresholds(demos, 0.99);
  CHECK(thr.steer_low == 0.0);
  CHECK(thr.steer_up == 0.0);
  CHECK(keeps(thr, make_command(0.0, 0.1, 0, 0)));
  CHECK_FALSE(keeps(thr, make_command(1e-9, 0.1, 0, 0)));
  CHECK_FALSE(keeps(thr, make_command(-0.3, 0.1, 0, 0)));
}

TEST_CASE("filter_bias threshold rules") {
  FilterThresholds thr{-0.9, 0.9, 0.8};
  CHECK_FALSE(keeps(thr, make_command(-1.0, 0.0, 0, 0)));
  CHECK_FALSE(keeps(thr, make_command(0.0, 0.8, 0, 0)));  // a_acc >= up is removed
  CHECK(keeps(thr, make_command(0.0, 0.7999, 0, 0)));
  CHECK_FALSE(keeps(thr, make_command(0.9, 0.0, 0, 0)));
  CHECK(keeps(thr, make_command(-0.8999, 0.0, 1.0, 1.0)));
}

TEST_CASE("filter_bias: survivors in bounds, gaps become segments, idempotent") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.3);
  DemonstrationSet demos;
  for (int e = 0; e < 3; ++e)
    demos.push_back(synthetic(e, 1500, 0.55, [&](double) {
      return make_command(std::clamp(g(rng), -1.0, 1.0), std::clamp(std::abs(g(rng)), 0.0, 1.0), 0, 0);
    }));
  FilterThresholds thr = fit_thresholds(demos, 0.99);
  FilterReport rep;
  DemonstrationSet once = filter_bias(demos, thr, &rep);
  CHECK(rep.total == 4500);
  CHECK(rep.removed == 4500 - frame_count(once));
  CHECK(rep.removed_fraction() > 0.005);
  CHECK(rep.removed_fraction() < 0.02);
  for (const auto& d : once) {
    for (std::size_t i = 0; i < d.frames.size(); ++i) {
      const auto& f = d.frames[i];
      CHECK(f.label.steer() > thr.steer_low);
      CHECK(f.label.steer() < thr.steer_up);
      CHECK(f.label.throttle() < thr.throttle_up);
      // a segment change only where frames were removed
      if (i > 0 && f.segment != d.frames[i - 1].segment) CHECK(f.s - d.frames[i - 1].s > 0.56);
      if (i > 0 && f.segment == d.frames[i - 1].segment) CHECK(f.s - d.frames[i - 1].s == doctest::Approx(0.55));
    }
  }
  CHECK(filter_bias(once, thr) == once);
}

TEST_CASE("lookahead labels: K = 1 identity and linear exactness") {
  Demonstration d = synthetic(0, 300, 0.56, [](double s) {
    return make_command(-0.5 + 0.002 * s, 0.1 + 0.001 * s, 0.3 - 0.0005 * s, 0.0);
  });
  auto k1 = build_lookahead_labels(d, 1, 1.0);
  REQUIRE(k1.size() == d.frames.size());
  for (std::size_t i = 0; i < k1.size(); ++i)
    for (std::size_t c = 0; c < kChannels; ++c) CHECK(k1[i].label(c, 0) == d.frames[i].label[c]);

  auto k5 = build_lookahead_labels(d, 5, 1.0);
  const double s_last = d.frames.back().s;
  REQUIRE(!k5.empty());
  CHECK(k5.back().s + 4.0 <= s_last);
  CHECK(k5.size() < d.frames.size());
  for (const auto& ts : k5) {
    for (int k = 0; k < 5; ++k) {
      double s = ts.s + k;
      CHECK(ts.label(0, k) == doctest::Approx(-0.5 + 0.002 * s).epsilon(1e-12));
      CHECK(ts.label(1, k) == doctest::Approx(0.1 + 0.001 * s).epsilon(1e-12));
      CHECK(ts.label(2, k) == doctest::Approx(0.3 - 0.0005 * s).epsilon(1e-12));
    }
  }

  Demonstration bad = d;
  bad.frames[10].s = bad.frames[9].s;
  CHECK_THROWS_AS(build_lookahead_labels(bad, 5, 1.0), InvalidInput);
}

TEST_CASE("lookahead labels never cross a segment gap and are causal") {
  Demonstration d = synthetic(0, 100, 0.5, [](double s) { return make_command(std::sin(s), 0, 0, 0); });
  for (std::size_t i = 50; i < d.frames.size(); ++i) d.frames[i].segment = 1;
  auto samples = build_lookahead_labels(d, 5, 1.0);
  for (const auto& ts : samples) {
    bool first = ts.s < d.frames[50].s;
    double seg_end = first ? d.frames[49].s : d.frames.back().s;
    CHECK(ts.s + 4.0 <= seg_end + 1e-12);
  }
  // changing a frame behind s leaves its labels untouched
  Demonstration e = d;
  e.frames[20].label[0] = 0.77;
  auto before = build_lookahead_labels(d, 5, 1.0);
  auto after = build_lookahead_labels(e, 5, 1.0);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    if (before[i].s > d.frames[20].s) CHECK(before[i].y == after[i].y);
}

TEST_CASE("lookahead labels match a dense 100 Hz resimulation") {
  world::TestMaps maps = world::build_test_maps();
  expert::Route route = expert::Route::circuit(maps.loop_map, 0, true);
  expert::ExpertParams ep;
  world::TruckParams tp;
  world::TruckState st;
  st.position = route.line().point_at(200.0);
  st.heading = route.line().heading_at(200.0);
  st.speed = ep.cruise_speed;

  const double dt = 0.01;
  Demonstration demo;
  std::vector<double> dense_s;
  std::vector<ControlCommand> dense_u;
  ControlCommand held;
  for (int n = 0; n < 6000; ++n) {
    world::RangeScan scan = world::cast_scan(st, maps.loop_map, 108, 1.5 * world::kPi);
    ControlCommand u = expert::expert_policy(st, route, scan, ep, tp);
    dense_s.push_back(st.odometer);
    dense_u.push_back(u);
    if (n % 10 == 0) {
      DemoFrame f;
      f.s = st.odometer;
      f.t = st.time;
      f.label = u;
      demo.frames.push_back(f);
      held = u;
    }
    st = world::step_dynamics(st, tp, held, dt);
  }
  auto samples = build_lookahead_labels(demo, 5, 1.0);
  REQUIRE(samples.size() > 500);
  std::array<double, kChannels> worst{};
  std::size_t j = 0;
  for (const auto& ts : samples) {
    for (int k = 1; k < 5; ++k) {
      double target = ts.s + k;
      while (j > 0 && dense_s[j] > target) --j;
      while (j + 1 < dense_s.size() && dense_s[j + 1] < target) ++j;
      double w = (target - dense_s[j]) / (dense_s[j + 1] - dense_s[j]);
      for (std::size_t c = 0; c < kChannels; ++c) {
        double ref = dense_u[j][c] + (dense_u[j + 1][c] - dense_u[j][c]) * w;
        worst[c] = std::max(worst[c], std::abs(ts.label(c, k) - ref));
      }
    }
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    INFO(kChannelNames[c], " worst ", worst[c]);
    CHECK(worst[c] < 0.01);
  }
}

TEST_CASE("augment: identity and scale") {
  Demonstration d = synthetic(0, 20, 0.5, [](double s) { return make_command(0.02 * s, 0.2, 0, 0); });
  auto samples = build_lookahead_labels(d, 5, 1.0);
  REQUIRE(!samples.empty());
  const TrainingSample& ts = samples.front();
  CHECK(augment(ts, 1.0, 0.0, false, 1.0) == ts);

  TrainingSample straight = ts;
  for (int k = 0; k < 5; ++k) straight.label(0, k) = 0.0;
  TrainingSample scaled = augment(straight, 1.05, 0.0, false, 1.0);
  for (int k = 0; k < 5; ++k) CHECK(scaled.label(0, k) == 0.0);
  CHECK(scaled.obs.scan.ranges[0] == doctest::Approx(10.4));  // 10.5 floored to the grid
  CHECK(scaled.obs.scan.ranges[1] == doctest::Approx(21.0));
  CHECK_FALSE(scaled.obs.scan.valid[2]);
  CHECK(scaled.obs.scan.ranges[3] == doctest::Approx(6.6));
  TrainingSample big = ts;
  big.obs.scan.ranges[1] = 116.0;
  TrainingSample out = augment(big, 1.05, 0.0, false, 1.0);
  CHECK_FALSE(out.obs.scan.valid[1]);
  CHECK(out.obs.scan.ranges[1] == 120.0);
  CHECK(augment(ts, 0.95, 0.0, false, 1.0).label(0, 2) == doctest::Approx(ts.label(0, 2) / 0.95));

  TrainingSample dropped = augment(ts, 1.0, 0.0, true, 1.0);
  CHECK_FALSE(dropped.obs.gnss.valid);
  CHECK(dropped.obs.gnss.position == world::Vec2{0.0, 0.0});
}

TEST_CASE("augment: yaw shifts the scan and corrects steering with a decaying profile") {
  world::MineMap m = corridor();
  world::TruckState st;
  st.position = {0.0, 1.3};
  TrainingSample ts;
  ts.K = 5;
  ts.y.assign(kChannels * 5, 0.0);
  ts.obs.scan = world::cast_scan(st, m, 108, 1.5 * world::kPi);
  const double step = ts.obs.scan.beam_angle(1) - ts.obs.scan.beam_angle(0);
  const double theta = 8 * step;  // whole beams, so the shift is exact
  TrainingSample aug = augment(ts, 1.0, theta, false, 1.0);
  world::TruckState yawed = st;
  yawed.heading = theta;
  world::RangeScan truth = world::cast_scan(yawed, m, 108, 1.5 * world::kPi);
  for (int i = 0; i + 8 < 108; ++i) {
    CHECK(aug.obs.scan.valid[i] == truth.valid[i]);
    if (truth.valid[i]) CHECK(std::abs(aug.obs.scan.ranges[i] - truth.ranges[i]) <= 0.2 + 1e-9);
  }
  for (int i = 108 - 8; i < 108; ++i) CHECK_FALSE(aug.obs.scan.valid[i]);

  const double ten = 10.0 * world::kPi / 180.0;
  TrainingSample y10 = augment(ts, 1.0, ten, false, 1.0);
  CHECK(y10.label(0, 0) == doctest::Approx(-0.174533).epsilon(1e-5));
  CHECK(y10.label(0, 2) == doctest::Approx(-0.5 * ten));
  CHECK(y10.label(0, 4) == 0.0);
  for (std::size_t c = 1; c < kChannels; ++c)
    for (int k = 0; k < 5; ++k) CHECK(y10.label(c, k) == 0.0);
}

TEST_CASE("augment: random draws keep ranges and scan invariants") {
  Demonstration d = synthetic(0, 40, 0.5, [](double s) { return make_command(std::sin(s), 0.5, 0.2, 0.1); });
  auto samples = build_lookahead_labels(d, 5, 1.0);
  std::mt19937_64 rng(23);
  AugmentParams params;
  for (int n = 0; n < 2000; ++n) {
    TrainingSample a = augment(samples[n % samples.size()], params, rng);
    for (std::size_t c = 0; c < kChannels; ++c)
      for (int k = 0; k < 5; ++k) {
        CHECK(a.label(c, k) >= channel_min(c));
        CHECK(a.label(c, k) <= channel_max(c));
      }
    for (int i = 0; i < a.obs.scan.beams; ++i) {
      double r = a.obs.scan.ranges[i];
      if (a.obs.scan.valid[i]) {
        CHECK(r >= world::kScanMinRange);
        CHECK(r < world::kScanMaxRange);
        CHECK(std::abs(r / 0.2 - std::round(r / 0.2)) < 1e-9);
      } else {
        CHECK(r == world::kScanMaxRange);
      }
    }
  }
}

TEST_CASE("augment: yaw-corrected labels steer a rotated truck back onto the centerline") {
  // Closed-loop replay: at every frame the label is the expert's command for
  // the truck aligned with the road at its current position, augmented with
  // the truck's actual yaw relative to the road.
  world::MineMap m = corridor();
  expert::Route route = expert::Route::chain(m, {{0, true}});
  expert::ExpertParams ep;
  world::TruckParams tp;
  auto replay = [&](double k_yaw) {
    world::TruckState st;
    st.position = {-400.0, 0.0};
    st.heading = 10.0 * world::kPi / 180.0;
    st.speed = ep.cruise_speed;
    double worst_late = 0.0;
    while (st.odometer < 50.0) {
      world::TruckState aligned = st;
      aligned.heading = 0.0;
      world::RangeScan scan = world::cast_scan(aligned, m, 108, 1.5 * world::kPi);
      TrainingSample ts;
      ts.K = 5;
      ts.y.assign(kChannels * 5, 0.0);
      ControlCommand u;
      try {
        u = expert::expert_policy(aligned, route, scan, ep, tp);
      } catch (const ExpertLost&) {
        return std::pair{1e9, 1e9};
      }
      for (std::size_t c = 0; c < kChannels; ++c)
        for (int k = 0; k < 5; ++k) ts.label(c, k) = u[c];
      TrainingSample aug = augment(ts, 1.0, st.heading, false, k_yaw);
      ControlCommand cmd = u;
      cmd[0] = aug.label(0, 0);
      for (int i = 0; i < 5; ++i) st = world::step_dynamics(st, tp, cmd, 0.02);
      if (st.odometer > 40.0) worst_late = std::max(worst_late, std::abs(st.position.y));
    }
    return std::pair{std::abs(st.position.y), worst_late};
  };
  auto [end_err, late] = replay(1.0);
  INFO("end ", end_err, " late ", late);
  CHECK(end_err < 0.3);
  CHECK(late < 0.3);
  auto [flipped, flipped_late] = replay(-1.0);
  CHECK(flipped > end_err);
}

TEST_CASE("JSON Lines round trip, manifest, and malformed lines") {
  fs::path dir = fs::temp_directory_path() / "minehaul_test_data";
  fs::create_directories(dir);
  // 15 minutes at 10 Hz
  DemonstrationSet demos;
  for (int e = 0; e < 15; ++e)
    demos.push_back(synthetic(e, 600, 0.5557, [](double s) {
      return make_command(std::sin(0.01 * s) / 3.0, 0.123456789012345678, 1.0 / 3.0, 0.0);
    }));
  demos[3].frames[7].obs.gnss = world::GnssFix{};
  demos[3].frames[8].obs.hlc = {expert::LateralCommand::TurnLeft, expert::LongitudinalCommand::Decelerate};
  demos[4].frames[9].segment = 1;
  CHECK(frame_count(demos) == 9000);
  fs::path file = dir / "demos.jsonl";
  write_demonstrations(file, demos);
  DemonstrationSet back = read_demonstrations(file);
  CHECK(frame_count(back) == 9000);
  CHECK(back == demos);

  auto samples = build_lookahead_labels(demos[0], 5, 1.0);
  fs::path sfile = dir / "samples.jsonl";
  write_samples(sfile, samples);
  CHECK(read_samples(sfile) == samples);

  Manifest man;
  man.kind = "samples";
  man.seed = 42;
  man.config_hash = "0123abcd";
  man.thresholds = FilterThresholds{-0.7, 0.71, 0.9};
  man.K = 5;
  man.spacing = 1.0;
  man.count = samples.size();
  write_manifest(manifest_path(sfile), man);
  CHECK(read_manifest(manifest_path(sfile)) == man);
  CHECK(read_manifest(manifest_path(sfile), std::string("0123abcd")) == man);
  CHECK_THROWS_AS(read_manifest(manifest_path(sfile), std::string("ffff0000")), ConfigError);

  {
    std::ifstream is(file);
    std::string l1, l2;
    std::getline(is, l1);
    std::getline(is, l2);
    std::ofstream os(dir / "broken.jsonl");
    os << l1 << "\n" << l2 << "\n{\"t\": 1.0, \"s\":\n";
  }
  try {
    read_demonstrations(dir / "broken.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("collection with a fixed seed writes byte-identical files") {
  world::TestMaps maps = world::build_test_maps();
  CollectConfig cfg;
  cfg.minutes = 2.0;
  cfg.episode_seconds = 30.0;
  cfg.traffic = 1;
  fs::path dir = fs::temp_directory_path() / "minehaul_test_collect";
  fs::create_directories(dir);
  DemonstrationSet a = collect_demonstrations(maps, cfg, 77);
  DemonstrationSet b = collect_demonstrations(maps, cfg, 77);
  write_demonstrations(dir / "a.jsonl", a);
  write_demonstrations(dir / "b.jsonl", b);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(frame_count(a) > 900);
  for (const auto& d : a) CHECK_NOTHROW(check_demonstration(d));
  DemonstrationSet c = collect_demonstrations(maps, cfg, 78);
  CHECK_FALSE(c == a);
  fs::remove_all(dir);
}
