#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "minehaul/errors.hpp"
#include "minehaul/world/collision.hpp"
#include "minehaul/world/map.hpp"
#include "minehaul/world/map_io.hpp"
#include "minehaul/world/sensors.hpp"
#include "minehaul/world/truck.hpp"

using namespace minehaul;
using namespace minehaul::world;

namespace {

// Long straight road along the x axis; walls at y = +/- width/2.
MineMap corridor(double width = 12.0, double half_length = 500.0) {
  Edge e;
  e.from = 0;
  e.to = 1;
  e.width = width;
  e.centerline = Polyline({{-half_length, 0.0}, {half_length, 0.0}});
  return MineMap("corridor", {Node{{-half_length, 0.0}}, Node{{half_length, 0.0}}}, {e}, {0, 1});
}

TruckState at(double x, double y, double heading = 0.0, double speed = 0.0) {
  TruckState s;
  s.position = {x, y};
  s.heading = heading;
  s.speed = speed;
  return s;
}

}  // namespace

TEST_CASE("step_dynamics: rest is a fixed point") {
  TruckParams p;
  TruckState s = at(3.0, -2.0, 0.4);
  TruckState n = step_dynamics(s, p, ControlCommand{}, 0.02);
  CHECK(n.position == s.position);
  CHECK(n.heading == s.heading);
  CHECK(n.speed == 0.0);
  CHECK(n.odometer == 0.0);
  CHECK(n.time == doctest::Approx(0.02));
}

TEST_CASE("step_dynamics: retarder alone never stops the truck") {
  TruckParams p;
  TruckState s = at(0, 0, 0, 5.56);
  double prev = s.speed;
  for (int i = 0; i < 20000; ++i) {
    s = step_dynamics(s, p, make_command(0, 0, 1, 0), 0.02);
    CHECK(s.speed < prev);
    CHECK(s.speed > 0.0);
    prev = s.speed;
    if (!(s.speed > 0.0)) break;
  }
  p.drag = 0.0;
  s = at(0, 0, 0, 5.56);
  for (int i = 0; i < 20000; ++i) s = step_dynamics(s, p, make_command(0, 0, 1, 0), 0.02);
  CHECK(s.speed > 0.0);
}

TEST_CASE("step_dynamics: friction brake stops from 1 m/s at 0.5 s") {
  TruckParams p;
  p.drag = 0.0;
  TruckState s = at(0, 0, 0, 1.0);
  // Closed form: v(t) = 1 - 2 t, zero at t = 0.5 s = 25 steps.
  for (int i = 1; i <= 25; ++i) {
    s = step_dynamics(s, p, make_command(0, 0, 0, 1), 0.02);
    if (i < 25) CHECK(s.speed == doctest::Approx(1.0 - 0.04 * i).epsilon(1e-9));
  }
  CHECK(s.speed == 0.0);
  CHECK(s.time == doctest::Approx(0.5));
  s = step_dynamics(s, p, make_command(0, 0, 0, 1), 0.02);
  CHECK(s.speed == 0.0);
}

TEST_CASE("step_dynamics: zero drag and zero commands keep speed") {
  TruckParams p;
  p.drag = 0.0;
  TruckState s = at(0, 0, 0.3, 4.2);
  for (int i = 0; i < 500; ++i) s = step_dynamics(s, p, make_command(0.3, 0, 0, 0), 0.02);
  CHECK(s.speed == 4.2);
}

TEST_CASE("step_dynamics: bicycle heading update and odometer") {
  TruckParams p;
  TruckState s = at(0, 0, 0, 5.0);
  TruckState n = step_dynamics(s, p, make_command(0.5, 0, 0, 0), 0.02);
  double delta = 0.5 * p.max_steering;
  CHECK(n.heading == doctest::Approx(5.0 * std::tan(delta) / p.wheelbase * 0.02).epsilon(1e-12));
  CHECK(n.odometer == doctest::Approx(0.1));
  CHECK(std::abs(n.steering) <= p.max_steering);
}

TEST_CASE("step_dynamics: invalid input is rejected") {
  TruckParams p;
  TruckState s = at(0, 0);
  CHECK_THROWS_AS(step_dynamics(s, p, make_command(NAN, 0, 0, 0), 0.02), InvalidInput);
  CHECK_THROWS_AS(step_dynamics(s, p, make_command(0, 1.5, 0, 0), 0.02), InvalidInput);
  CHECK_THROWS_AS(step_dynamics(s, p, make_command(0, 0, -0.1, 0), 0.02), InvalidInput);
  CHECK_THROWS_AS(step_dynamics(s, p, ControlCommand{}, 0.0), InvalidInput);
  CHECK_THROWS_AS(step_dynamics(s, p, ControlCommand{}, 0.2), InvalidInput);
  s.position.x = INFINITY;
  CHECK_THROWS_AS(step_dynamics(s, p, ControlCommand{}, 0.02), InvalidInput);
  TruckParams bad;
  bad.electric_brake_fade_speed = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("cast_scan: perpendicular beam in a 12 m corridor reads 6.0 m") {
  MineMap m = corridor();
  // 9 beams over 180 degrees: beam 0 points right (-90 deg), beam 8 left.
  RangeScan scan = cast_scan(at(0, 0), m, 9, kPi);
  REQUIRE(scan.ranges.size() == 9);
  CHECK(scan.beam_angle(8) == doctest::Approx(kPi / 2));
  CHECK(scan.valid[8]);
  CHECK(scan.ranges[8] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(scan.ranges[0] == doctest::Approx(6.0).epsilon(1e-12));
  // Oracle: off-centre by 0.37 m, wall at 6 - 0.37 = 5.63, floored to 5.6.
  scan = cast_scan(at(0, 0.37), m, 9, kPi);
  CHECK(scan.ranges[8] == doctest::Approx(5.6).epsilon(1e-12));
  CHECK(scan.ranges[0] == doctest::Approx(6.2).epsilon(1e-12));
}

TEST_CASE("cast_scan: open field is all invalid") {
  MineMap empty("empty", {}, {}, {});
  RangeScan scan = cast_scan(at(0, 0), empty, 108, 1.5 * kPi);
  REQUIRE(scan.beams == 108);
  for (int i = 0; i < 108; ++i) {
    CHECK_FALSE(scan.valid[i]);
    CHECK(scan.ranges[i] == 120.0);
  }
}

TEST_CASE("cast_scan: near wall clamps to 4 m") {
  MineMap m = corridor(6.0);
  RangeScan scan = cast_scan(at(0, 0), m, 9, kPi);
  CHECK(scan.valid[8]);
  CHECK(scan.ranges[8] == 4.0);
}

TEST_CASE("cast_scan: invariants and wall approach monotonicity") {
  MineMap m = build_loop_map();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Polyline& c = m.edges()[0].centerline;
  for (int t = 0; t < 50; ++t) {
    double s = u(rng) * c.length();
    TruckState st = at(0, 0, c.heading_at(s) + (u(rng) - 0.5) * 0.3);
    st.position = c.point_at(s) + left_normal(unit(c.heading_at(s))) * ((u(rng) - 0.5) * 4.0);
    RangeScan scan = cast_scan(st, m, 108, 1.5 * kPi);
    REQUIRE(scan.ranges.size() == 108);
    REQUIRE(scan.valid.size() == 108);
    for (int i = 0; i < 108; ++i) {
      if (!scan.valid[i]) continue;
      CHECK(scan.ranges[i] >= 4.0);
      CHECK(scan.ranges[i] <= 120.0);
      double q = scan.ranges[i] / 0.2;
      CHECK(std::abs(q - std::round(q)) < 1e-6);
    }
  }
  MineMap wall = corridor();
  for (double y = -2.0; y <= 1.0; y += 0.137) {
    double r0 = cast_scan(at(0, y), wall, 9, kPi).ranges[8];
    double r1 = cast_scan(at(0, y + 1.0), wall, 9, kPi).ranges[8];
    CHECK(r0 - r1 >= 0.8 - 1e-9);
    CHECK(r0 - r1 <= 1.2 + 1e-9);
  }
}

TEST_CASE("cast_scan: obstacles are seen and bad arguments throw") {
  MineMap m = corridor();
  OrientedBox box{{30.0, 0.0}, 0.0, 6.5, 3.5};
  RangeScan scan = cast_scan(at(0, 0), m, 9, kPi, std::span<const OrientedBox>(&box, 1));
  CHECK(scan.ranges[4] == doctest::Approx(23.4).epsilon(1e-12));
  CHECK_THROWS_AS(cast_scan(at(0, 0), m, 7, kPi), InvalidInput);
  CHECK_THROWS_AS(cast_scan(at(0, 0), m, 9, 0.0), InvalidInput);
  CHECK_THROWS_AS(cast_scan(at(0, 0), m, 9, 7.0), InvalidInput);
}

TEST_CASE("quantize_range floors onto the grid") {
  CHECK(quantize_range(6.0) == 6.0);
  CHECK(quantize_range(6.19) == doctest::Approx(6.0));
  CHECK(quantize_range(6.2) == doctest::Approx(6.2));
  CHECK(quantize_range(1.0) == 4.0);
  CHECK(quantize_range(500.0) == 120.0);
}

TEST_CASE("sample_gnss: failure injection") {
  std::mt19937_64 rng(42);
  TruckState s = at(12.5, -3.25);
  for (int i = 0; i < 1000; ++i) {
    GnssFix f = sample_gnss(s, 0.0, rng);
    CHECK(f.valid);
    CHECK(f.position == s.position);
  }
  for (int i = 0; i < 1000; ++i) {
    GnssFix f = sample_gnss(s, 1.0, rng);
    CHECK_FALSE(f.valid);
    CHECK(f.position == Vec2{0.0, 0.0});
  }
  int invalid = 0;
  for (int i = 0; i < 100000; ++i) invalid += !sample_gnss(s, 0.04, rng).valid;
  CHECK(invalid >= 3700);
  CHECK(invalid <= 4300);
}

TEST_CASE("check_collision: centerline, wall contact, heading error") {
  MineMap m = corridor();
  TruckParams p;
  CollisionReport r = check_collision(at(0, 0), p, m);
  CHECK_FALSE(r.collision);
  CHECK(r.lateral_deviation == doctest::Approx(0.0));
  r = check_collision(at(0, 3.6), p, m);  // 2.4 m from the wall, half width 3.5
  CHECK(r.collision);
  CHECK(r.hit_wall);
  r = check_collision(at(0, 2.4), p, m);  // 3.6 m from the wall
  CHECK_FALSE(r.collision);
  CHECK(r.lateral_deviation == doctest::Approx(2.4));
  r = check_collision(at(0, 0, 10.0 * kPi / 180.0), p, m);
  CHECK(r.heading_error == doctest::Approx(10.0 * kPi / 180.0));
  OrientedBox other{{10.0, 0.0}, 0.0, 6.5, 3.5};
  r = check_collision(at(0, 0), p, m, std::span<const OrientedBox>(&other, 1));
  CHECK(r.collision);
  CHECK(r.hit_participant);
  // Same pose, same report.
  CollisionReport a = check_collision(at(5, 1, 0.2), p, m);
  CollisionReport b = check_collision(at(5, 1, 0.2), p, m);
  CHECK(a.collision == b.collision);
  CHECK(a.lateral_deviation == b.lateral_deviation);
  CHECK(a.heading_error == b.heading_error);
}

TEST_CASE("build_test_maps: lengths, intersections, invariants") {
  TestMaps maps = build_test_maps();
  CHECK(maps.loop_map.total_length() >= 1500.0);
  CHECK(maps.loop_map.edges().size() == 1);
  CHECK(maps.loop_map.edges()[0].centerline.closed());
  CHECK(maps.network_map.total_length() >= 11000.0);
  CHECK(maps.network_map.intersections().size() == 6);
  int sharp = 0;
  for (const Intersection& ix : maps.network_map.intersections()) sharp += ix.sharpness > kPi / 3.0;
  CHECK(sharp >= 2);
  CHECK_NOTHROW(maps.loop_map.validate(7.0));
  CHECK_NOTHROW(maps.network_map.validate(7.0));

  // Both curve directions on the loop.
  const Polyline& c = maps.loop_map.edges()[0].centerline;
  bool left = false, right = false;
  for (double s = 0; s < c.length(); s += 5.0) {
    double k = c.curvature_at(s);
    left |= k > 0.01;
    right |= k < -0.01;
  }
  CHECK(left);
  CHECK(right);
}

TEST_CASE("map validation rejects narrow roads") {
  MineMap m = corridor(6.0);
  CHECK_THROWS_AS(m.validate(7.0), InvalidInput);
}

TEST_CASE("map JSON round trip") {
  MineMap net = build_network_map();
  auto path = std::filesystem::temp_directory_path() / "minehaul_map_roundtrip.json";
  save_map(net, path);
  MineMap back = load_map(path);
  CHECK(back.edges().size() == net.edges().size());
  CHECK(back.intersections().size() == 6);
  CHECK(back.total_length() == doctest::Approx(net.total_length()).epsilon(1e-12));
  CHECK(back.sites() == net.sites());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_map(path), IoError);
  CHECK_THROWS_AS(map_from_json(nlohmann::json::parse(R"({"nodes": 3})")), ParseError);
}

TEST_CASE("geometry helpers") {
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  Polyline sq({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, true);
  CHECK(sq.length() == doctest::Approx(40.0));
  CHECK(sq.normalize(-5.0) == doctest::Approx(35.0));
  Projection p = sq.project({5.0, 1.0});
  CHECK(p.s == doctest::Approx(5.0));
  CHECK(p.lateral == doctest::Approx(1.0));
  p = sq.project({1.0, 5.0}, 39.0, 3.0);
  CHECK(p.s == doctest::Approx(35.0));
  OrientedBox a{{0, 0}, 0.0, 2.0, 1.0};
  OrientedBox b{{3.5, 0}, kPi / 4, 2.0, 1.0};
  CHECK(boxes_intersect(a, b));
  b.center = {6.0, 0.0};
  CHECK_FALSE(boxes_intersect(a, b));
  CHECK(box_intersects_segment(a, {-5, 0.5}, {5, 0.5}));
  CHECK_FALSE(box_intersects_segment(a, {-5, 1.5}, {5, 1.5}));
}
