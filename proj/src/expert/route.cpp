#include "minehaul/expert/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "minehaul/errors.hpp"

namespace minehaul::expert {

using world::Edge;
using world::wrap_angle;

namespace {

Polyline oriented(const Edge& e, bool forward) { return forward ? e.centerline : e.centerline.reversed(); }

int departure_node(const Edge& e, bool forward) { return forward ? e.from : e.to; }
int arrival_node(const Edge& e, bool forward) { return forward ? e.to : e.from; }

void push_point(std::vector<Vec2>& pts, Vec2 p) {
  if (pts.empty() || norm(p - pts.back()) > 1e-6) pts.push_back(p);
}

// Appends the part of `line` between arc lengths a and b.
void append_span(std::vector<Vec2>& pts, const Polyline& line, double a, double b) {
  push_point(pts, line.point_at(a));
  const auto& cum = line.cumulative();
  const auto& p = line.points();
  for (std::size_t i = 0; i < p.size(); ++i)
    if (cum[i] > a + 1e-9 && cum[i] < b - 1e-9) push_point(pts, p[i]);
  push_point(pts, line.point_at(b));
}

}  // namespace

Route Route::circuit(const MineMap& map, int edge, bool forward) {
  if (edge < 0 || edge >= static_cast<int>(map.edges().size())) throw InvalidInput("route: edge out of range");
  const Edge& e = map.edges()[edge];
  if (!e.centerline.closed()) throw InvalidInput("route: circuit needs a closed edge");
  if (!forward && !e.bidirectional) throw InvalidInput("route: edge is one-way");
  Route r;
  r.line_ = oriented(e, forward);
  r.width_ = e.width;
  r.edges_ = {{edge, forward}};
  r.finish();
  return r;
}

Route Route::chain(const MineMap& map, std::vector<DirectedEdge> edges, RouteOptions options) {
  if (edges.empty()) throw InvalidInput("route: no edges");
  const int ne = static_cast<int>(map.edges().size());
  std::vector<Polyline> legs;
  Route r;
  r.width_ = std::numeric_limits<double>::infinity();
  for (const DirectedEdge& d : edges) {
    if (d.edge < 0 || d.edge >= ne) throw InvalidInput("route: edge out of range");
    const Edge& e = map.edges()[d.edge];
    if (e.centerline.closed()) throw InvalidInput("route: closed edge inside a chain");
    if (!d.forward && !e.bidirectional) throw InvalidInput("route: edge is one-way");
    legs.push_back(oriented(e, d.forward));
    r.width_ = std::min(r.width_, e.width);
  }

  struct Joint {
    double trim = 0.0;
    double deflection = 0.0;
    Turn side = Turn::Straight;
    int intersection = -1;
  };
  std::vector<Joint> joints(edges.size() > 0 ? edges.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const Edge& a = map.edges()[edges[i].edge];
    const Edge& b = map.edges()[edges[i + 1].edge];
    int node = arrival_node(a, edges[i].forward);
    if (node != departure_node(b, edges[i + 1].forward)) throw InvalidInput("route: consecutive edges do not share a node");
    Joint& j = joints[i];
    j.intersection = map.intersection_at(node);
    if (j.intersection >= 0) {
      const world::TurnMovement* m =
          map.find_movement(node, edges[i].edge, edges[i].forward, edges[i + 1].edge, edges[i + 1].forward);
      if (!m) throw InvalidInput("route: movement not permitted at node " + std::to_string(node));
      j.deflection = m->deflection;
      j.side = m->side;
    } else {
      if (edges[i].edge == edges[i + 1].edge) throw InvalidInput("route: u-turn on an edge");
      double h_in = legs[i].heading_at(legs[i].length());
      double h_out = legs[i + 1].heading_at(0.0);
      j.deflection = wrap_angle(h_out - h_in);
      j.side = std::abs(j.deflection) <= map.options().straight_tolerance ? Turn::Straight
               : j.deflection > 0.0                                      ? Turn::Left
                                                                         : Turn::Right;
    }
    double radius = std::abs(j.deflection) <= kPi / 3.0 ? options.smooth_fillet_radius : options.sharp_fillet_radius;
    double limit = 0.45 * std::min(legs[i].length(), legs[i + 1].length());
    j.trim = std::min(limit, radius * std::tan(std::abs(j.deflection) * 0.5));
  }

  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const Polyline& leg = legs[i];
    double a = i > 0 ? joints[i - 1].trim : 0.0;
    double b = i + 1 < legs.size() ? leg.length() - joints[i].trim : leg.length();
    append_span(pts, leg, a, b);
    if (i + 1 == legs.size()) break;

    Joint& j = joints[i];
    const Polyline& next = legs[i + 1];
    double h_in = leg.heading_at(b);
    double h_out = next.heading_at(j.trim);
    double turn = wrap_angle(h_out - h_in);
    Vec2 start = pts.back();
    double s_start = world::Polyline(pts).length();
    RouteTurn rt;
    rt.side = j.side;
    rt.intersection = j.intersection;
    rt.deflection = j.deflection;
    if (std::abs(turn) > 1e-4 && j.trim > 1e-6) {
      // Circular fillet from the trimmed end of this leg to the trimmed start of the next.
      double radius = j.trim / std::tan(std::abs(turn) * 0.5);
      double arc = radius * std::abs(turn);
      int n = std::max(2, static_cast<int>(std::ceil(arc)));
      double sign = turn > 0.0 ? 1.0 : -1.0;
      Vec2 center = start + world::left_normal(unit(h_in)) * (sign * radius);
      for (int k = 1; k < n; ++k) {
        double h = h_in + turn * k / n;
        push_point(pts, center - world::left_normal(unit(h)) * (sign * radius));
      }
      rt.s_begin = s_start;
      rt.s_end = s_start + arc;
      rt.s_node = s_start + arc * 0.5;
    } else {
      rt.s_begin = rt.s_end = rt.s_node = s_start;
    }
    if (rt.side == Turn::Straight || rt.s_end - rt.s_begin < 2.0 * options.straight_zone) {
      rt.s_begin = std::min(rt.s_begin, rt.s_node - options.straight_zone);
      rt.s_end = std::max(rt.s_end, rt.s_node + options.straight_zone);
    }
    if (j.intersection >= 0) r.turns_.push_back(rt);
  }
  r.line_ = Polyline(std::move(pts));
  r.edges_ = std::move(edges);
  for (RouteTurn& t : r.turns_) {
    t.s_begin = std::max(0.0, t.s_begin);
    t.s_end = std::min(r.line_.length(), t.s_end);
  }
  r.finish();
  return r;
}

void Route::finish() {
  const auto& cum = line_.cumulative();
  for (std::size_t i = 1; i < cum.size(); ++i)
    if (!(cum[i] > cum[i - 1])) throw InvalidInput("route: arc length not strictly increasing");
  int n = static_cast<int>(std::ceil(line_.length())) + 1;
  curvature_.resize(n);
  for (int i = 0; i < n; ++i) curvature_[i] = line_.curvature_at(static_cast<double>(i), 3.0);
  std::sort(turns_.begin(), turns_.end(), [](const RouteTurn& a, const RouteTurn& b) { return a.s_node < b.s_node; });
}

double Route::curvature(double s) const {
  if (curvature_.empty()) return 0.0;
  s = line_.normalize(s);
  double f = std::clamp(s, 0.0, static_cast<double>(curvature_.size() - 1));
  std::size_t i = static_cast<std::size_t>(f);
  if (i + 1 >= curvature_.size()) return curvature_.back();
  double t = f - static_cast<double>(i);
  return curvature_[i] * (1.0 - t) + curvature_[i + 1] * t;
}

double Route::ahead(double from, double to) const {
  if (!closed()) return to - from;
  double d = std::fmod(to - from, length());
  if (d < 0.0) d += length();
  return d;
}

std::optional<RouteTurn> Route::upcoming_turn(double s, double distance) const {
  std::optional<RouteTurn> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const RouteTurn& t : turns_) {
    double gap;
    if (closed()) {
      double into = ahead(t.s_begin, s);
      gap = into <= t.s_end - t.s_begin ? 0.0 : ahead(s, t.s_begin);
    } else {
      if (s > t.s_end) continue;
      gap = std::max(0.0, t.s_begin - s);
    }
    if (gap <= distance && gap < best_gap) {
      best_gap = gap;
      best = t;
    }
  }
  return best;
}

std::optional<Route> plan_route(const MineMap& map, int start_node, int goal_node, RouteOptions options) {
  const auto& edges = map.edges();
  const int nn = static_cast<int>(map.nodes().size());
  if (start_node < 0 || start_node >= nn || goal_node < 0 || goal_node >= nn) throw InvalidInput("plan_route: node out of range");
  if (start_node == goal_node) return std::nullopt;
  const int ns = static_cast<int>(edges.size()) * 2;
  auto state = [](int e, bool f) { return e * 2 + (f ? 0 : 1); };
  std::vector<double> dist(ns, std::numeric_limits<double>::infinity());
  std::vector<int> prev(ns, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (edges[e].centerline.closed()) continue;
    for (bool f : {true, false}) {
      if (!f && !edges[e].bidirectional) continue;
      if (departure_node(edges[e], f) != start_node) continue;
      int st = state(e, f);
      dist[st] = edges[e].centerline.length();
      q.push({dist[st], st});
    }
  }
  int found = -1;
  while (!q.empty()) {
    auto [d, st] = q.top();
    q.pop();
    if (d > dist[st]) continue;
    int e = st / 2;
    bool f = (st % 2) == 0;
    int node = arrival_node(edges[e], f);
    if (node == goal_node) {
      found = st;
      break;
    }
    auto relax = [&](int e2, bool f2) {
      int s2 = state(e2, f2);
      double nd = d + edges[e2].centerline.length();
      if (nd < dist[s2]) {
        dist[s2] = nd;
        prev[s2] = st;
        q.push({nd, s2});
      }
    };
    int ix = map.intersection_at(node);
    if (ix >= 0) {
      for (const world::TurnMovement& m : map.intersections()[ix].turns)
        if (m.from_edge == e && m.from_forward == f) relax(m.to_edge, m.to_forward);
    } else {
      for (int e2 = 0; e2 < static_cast<int>(edges.size()); ++e2) {
        if (e2 == e || edges[e2].centerline.closed()) continue;
        for (bool f2 : {true, false}) {
          if (!f2 && !edges[e2].bidirectional) continue;
          if (departure_node(edges[e2], f2) == node) relax(e2, f2);
        }
      }
    }
  }
  if (found < 0) return std::nullopt;
  std::vector<DirectedEdge> path;
  for (int st = found; st >= 0; st = prev[st]) path.push_back({st / 2, (st % 2) == 0});
  std::reverse(path.begin(), path.end());
  return Route::chain(map, std::move(path), options);
}

RouteTracker::RouteTracker(const Route& route, double s0) : route_(&route), s_(route.line().normalize(s0)) {}

void RouteTracker::reset(double s) {
  s_ = route_->line().normalize(s);
}

world::Projection RouteTracker::update(Vec2 position) {
  if (!route_) throw InvalidInput("route tracker not bound");
  world::Projection p = route_->line().project(position, s_, 40.0);
  if (p.distance > 15.0) p = route_->line().project(position);
  double delta = route_->closed() ? wrap_angle((p.s - s_) / route_->length() * 2.0 * kPi) / (2.0 * kPi) * route_->length()
                                  : p.s - s_;
  progress_ += delta;
  s_ = p.s;
  return p;
}

}  // namespace minehaul::expert
