#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace minehaul::world {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 left_normal(Vec2 d) { return {-d.y, d.x}; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Distance along the ray `origin + t * dir` (|dir| = 1) to segment [a, b].
std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

struct Projection {
  double s = 0.0;         // arc length of the foot point
  double lateral = 0.0;   // signed, positive to the left of travel
  double heading = 0.0;   // tangent heading at the foot point
  double distance = 0.0;  // unsigned distance to the polyline
  Vec2 foot;
  std::size_t segment = 0;
};

/// Piecewise-linear curve with a cumulative arc-length table. A closed
/// polyline has an implicit segment from the last point back to the first.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points, bool closed = false);

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  bool closed() const { return closed_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::size_t segment_count() const;
  Vec2 segment_start(std::size_t i) const { return points_[i]; }
  Vec2 segment_end(std::size_t i) const { return points_[(i + 1) % points_.size()]; }

  /// Maps s into [0, length) for closed curves, clamps for open ones.
  double normalize(double s) const;
  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  /// Signed curvature from the heading change over +/- ds.
  double curvature_at(double s, double ds = 2.0) const;

  Projection project(Vec2 p) const;
  /// Projection restricted to segments within `window` of `s_hint`.
  Projection project(Vec2 p, double s_hint, double window) const;

  Polyline reversed() const;
  /// Resampled copy with spacing at most `step`.
  Polyline resampled(double step) const;

 private:
  std::size_t segment_index(double s) const;
  Projection project_segment(Vec2 p, std::size_t i) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
  bool closed_ = false;
};

/// Oriented rectangle.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  std::array<Vec2, 4> corners() const;
};

bool box_intersects_segment(const OrientedBox& box, Vec2 a, Vec2 b);
bool boxes_intersect(const OrientedBox& a, const OrientedBox& b);

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Uniform grid bucketing of line segments for radius queries.
class SegmentGrid {
 public:
  explicit SegmentGrid(double cell = 25.0) : cell_(cell) {}

  std::uint32_t add(Segment s, std::uint32_t tag = 0);
  const Segment& segment(std::uint32_t id) const { return segments_[id]; }
  std::uint32_t tag(std::uint32_t id) const { return tags_[id]; }
  std::size_t size() const { return segments_.size(); }
  /// Sorted, unique ids of segments whose cells touch the square around
  /// `center`. Safe to call concurrently.
  void query(Vec2 center, double radius, std::vector<std::uint32_t>& out) const;

 private:
  static std::int64_t key(std::int64_t ix, std::int64_t iy) { return (ix << 32) ^ (iy & 0xffffffff); }

  double cell_;
  std::vector<Segment> segments_;
  std::vector<std::uint32_t> tags_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace minehaul::world
