#include "minehaul/world/geometry.hpp"

#include <algorithm>
#include <limits>

#include "minehaul/errors.hpp"

namespace minehaul::world {

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + ab * t));
}

std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  Vec2 e = b - a;
  double denom = cross(dir, e);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  Vec2 w = a - origin;
  double t = cross(w, e) / denom;
  double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  int o1 = orientation(p1, p2, q1);
  int o2 = orientation(p1, p2, q2);
  int o3 = orientation(q1, q2, p1);
  int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

Polyline::Polyline(std::vector<Vec2> points, bool closed) : points_(std::move(points)), closed_(closed) {
  if (points_.size() < 2) throw InvalidInput("polyline needs at least two points");
  if (closed_ && points_.front() == points_.back()) points_.pop_back();
  std::size_t n = segment_count();
  cumulative_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cumulative_[i + 1] = cumulative_[i] + norm(segment_end(i) - segment_start(i));
}

std::size_t Polyline::segment_count() const {
  if (points_.size() < 2) return 0;
  return closed_ ? points_.size() : points_.size() - 1;
}

double Polyline::normalize(double s) const {
  double len = length();
  if (closed_) {
    s = std::fmod(s, len);
    if (s < 0.0) s += len;
    return s;
  }
  return std::clamp(s, 0.0, len);
}

std::size_t Polyline::segment_index(double s) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(i, segment_count() - 1);
}

Vec2 Polyline::point_at(double s) const {
  s = normalize(s);
  std::size_t i = segment_index(s);
  double seg = cumulative_[i + 1] - cumulative_[i];
  double t = seg > 0.0 ? (s - cumulative_[i]) / seg : 0.0;
  Vec2 a = segment_start(i);
  return a + (segment_end(i) - a) * t;
}

double Polyline::heading_at(double s) const {
  std::size_t i = segment_index(normalize(s));
  Vec2 d = segment_end(i) - segment_start(i);
  return std::atan2(d.y, d.x);
}

double Polyline::curvature_at(double s, double ds) const {
  double a = heading_at(s - ds);
  double b = heading_at(s + ds);
  if (!closed_) {
    double lo = normalize(s - ds);
    double hi = normalize(s + ds);
    if (hi - lo <= 0.0) return 0.0;
    return wrap_angle(b - a) / (hi - lo);
  }
  return wrap_angle(b - a) / (2.0 * ds);
}

Projection Polyline::project_segment(Vec2 p, std::size_t i) const {
  Vec2 a = segment_start(i);
  Vec2 ab = segment_end(i) - a;
  double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  Projection r;
  r.foot = a + ab * t;
  r.segment = i;
  r.s = cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
  r.heading = std::atan2(ab.y, ab.x);
  Vec2 d = p - r.foot;
  r.distance = norm(d);
  double len = std::sqrt(len2);
  r.lateral = len > 0.0 ? cross(ab, p - a) / len : 0.0;
  return r;
}

Projection Polyline::project(Vec2 p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segment_count(); ++i) {
    Projection c = project_segment(p, i);
    if (c.distance < best.distance) best = c;
  }
  return best;
}

Projection Polyline::project(Vec2 p, double s_hint, double window) const {
  if (closed_ ? 2.0 * window >= length() : false) return project(p);
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  auto scan_range = [&](double lo, double hi) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, length());
    if (hi < lo) return;
    std::size_t i0 = segment_index(lo);
    std::size_t i1 = segment_index(hi);
    for (std::size_t i = i0; i <= i1; ++i) {
      Projection c = project_segment(p, i);
      if (c.distance < best.distance) best = c;
    }
  };
  if (closed_) {
    double h = normalize(s_hint);
    scan_range(h - window, h + window);
    if (h - window < 0.0) scan_range(length() + (h - window), length());
    if (h + window > length()) scan_range(0.0, h + window - length());
  } else {
    scan_range(s_hint - window, s_hint + window);
  }
  if (!std::isfinite(best.distance)) return project(p);
  return best;
}

Polyline Polyline::reversed() const {
  std::vector<Vec2> pts(points_.rbegin(), points_.rend());
  return Polyline(std::move(pts), closed_);
}

Polyline Polyline::resampled(double step) const {
  std::vector<Vec2> out;
  std::size_t n = segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = segment_start(i);
    Vec2 b = segment_end(i);
    int pieces = std::max(1, static_cast<int>(std::ceil(norm(b - a) / step - 1e-9)));
    for (int j = 0; j < pieces; ++j) out.push_back(a + (b - a) * (static_cast<double>(j) / pieces));
  }
  if (!closed_) out.push_back(points_.back());
  return Polyline(std::move(out), closed_);
}

std::array<Vec2, 4> OrientedBox::corners() const {
  Vec2 f = unit(heading) * half_length;
  Vec2 l = left_normal(unit(heading)) * half_width;
  return {center + f + l, center - f + l, center - f - l, center + f - l};
}

bool box_intersects_segment(const OrientedBox& box, Vec2 a, Vec2 b) {
  // Liang-Barsky clip of the segment in box-local coordinates.
  Vec2 f = unit(box.heading);
  Vec2 l = left_normal(f);
  Vec2 pa{dot(a - box.center, f), dot(a - box.center, l)};
  Vec2 pb{dot(b - box.center, f), dot(b - box.center, l)};
  Vec2 d = pb - pa;
  double t0 = 0.0;
  double t1 = 1.0;
  auto clip = [&](double p, double q) {
    if (std::abs(p) < 1e-15) return q >= 0.0;
    double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  return clip(-d.x, pa.x + box.half_length) && clip(d.x, box.half_length - pa.x) &&
         clip(-d.y, pa.y + box.half_width) && clip(d.y, box.half_width - pa.y) && t0 <= t1;
}

bool boxes_intersect(const OrientedBox& a, const OrientedBox& b) {
  auto ca = a.corners();
  auto cb = b.corners();
  std::array<Vec2, 4> axes{unit(a.heading), left_normal(unit(a.heading)), unit(b.heading),
                           left_normal(unit(b.heading))};
  for (Vec2 ax : axes) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (Vec2 p : ca) {
      amin = std::min(amin, dot(p, ax));
      amax = std::max(amax, dot(p, ax));
    }
    for (Vec2 p : cb) {
      bmin = std::min(bmin, dot(p, ax));
      bmax = std::max(bmax, dot(p, ax));
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

std::uint32_t SegmentGrid::add(Segment s, std::uint32_t tag) {
  auto id = static_cast<std::uint32_t>(segments_.size());
  segments_.push_back(s);
  tags_.push_back(tag);
  auto ix0 = static_cast<std::int64_t>(std::floor(std::min(s.a.x, s.b.x) / cell_));
  auto ix1 = static_cast<std::int64_t>(std::floor(std::max(s.a.x, s.b.x) / cell_));
  auto iy0 = static_cast<std::int64_t>(std::floor(std::min(s.a.y, s.b.y) / cell_));
  auto iy1 = static_cast<std::int64_t>(std::floor(std::max(s.a.y, s.b.y) / cell_));
  for (auto ix = ix0; ix <= ix1; ++ix)
    for (auto iy = iy0; iy <= iy1; ++iy) cells_[key(ix, iy)].push_back(id);
  return id;
}

void SegmentGrid::query(Vec2 center, double radius, std::vector<std::uint32_t>& out) const {
  out.clear();
  auto ix0 = static_cast<std::int64_t>(std::floor((center.x - radius) / cell_));
  auto ix1 = static_cast<std::int64_t>(std::floor((center.x + radius) / cell_));
  auto iy0 = static_cast<std::int64_t>(std::floor((center.y - radius) / cell_));
  auto iy1 = static_cast<std::int64_t>(std::floor((center.y + radius) / cell_));
  for (auto ix = ix0; ix <= ix1; ++ix) {
    for (auto iy = iy0; iy <= iy1; ++iy) {
      auto it = cells_.find(key(ix, iy));
      if (it == cells_.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace minehaul::world
