#include "minehaul/world/map.hpp"

#include <algorithm>
#include <limits>

#include "minehaul/errors.hpp"

namespace minehaul::world {

const char* to_string(Turn t) {
  switch (t) {
    case Turn::Left:
      return "left";
    case Turn::Right:
      return "right";
    default:
      return "straight";
  }
}

Turn turn_from_string(const std::string& s) {
  if (s == "left") return Turn::Left;
  if (s == "right") return Turn::Right;
  if (s == "straight") return Turn::Straight;
  throw ParseError("unknown turn '" + s + "'");
}

MineMap::MineMap(std::string name, std::vector<Node> nodes, std::vector<Edge> edges, std::vector<int> sites,
                 MapBuildOptions options)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      sites_(std::move(sites)),
      options_(options) {
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.to < 0 || e.from >= static_cast<int>(nodes_.size()) ||
        e.to >= static_cast<int>(nodes_.size()))
      throw InvalidInput("edge references unknown node");
    if (e.centerline.points().size() < 2 || !(e.centerline.length() > 0.0))
      throw InvalidInput("edge centerline needs two points and positive length");
  }
  build_intersections();
  build_walls();
  build_grids();
}

double MineMap::total_length() const {
  double total = 0.0;
  for (const Edge& e : edges_) total += e.centerline.length();
  return total;
}

int MineMap::intersection_at(int node) const {
  for (std::size_t i = 0; i < intersections_.size(); ++i)
    if (intersections_[i].node == node) return static_cast<int>(i);
  return -1;
}

const TurnMovement* MineMap::find_movement(int node, int from_edge, bool from_forward, int to_edge,
                                           bool to_forward) const {
  int idx = intersection_at(node);
  if (idx < 0) return nullptr;
  for (const TurnMovement& m : intersections_[idx].turns)
    if (m.from_edge == from_edge && m.from_forward == from_forward && m.to_edge == to_edge &&
        m.to_forward == to_forward)
      return &m;
  return nullptr;
}

namespace {

constexpr double kHeadingBaseline = 20.0;

// Travel heading when arriving at the edge end (`at_end` = the `to` node).
double arrival_heading(const Edge& e, bool at_end) {
  const Polyline& c = e.centerline;
  double base = std::min(kHeadingBaseline, c.length());
  Vec2 d = at_end ? c.point_at(c.length()) - c.point_at(c.length() - base) : c.point_at(0.0) - c.point_at(base);
  return std::atan2(d.y, d.x);
}

double departure_heading(const Edge& e, bool from_start) {
  const Polyline& c = e.centerline;
  double base = std::min(kHeadingBaseline, c.length());
  Vec2 d = from_start ? c.point_at(base) - c.point_at(0.0) : c.point_at(c.length() - base) - c.point_at(c.length());
  return std::atan2(d.y, d.x);
}

}  // namespace

void MineMap::build_intersections() {
  intersections_.clear();
  for (int n = 0; n < static_cast<int>(nodes_.size()); ++n) {
    struct End {
      int edge;
      bool is_start;
    };
    std::vector<End> ends;
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      if (edges_[e].centerline.closed()) continue;
      if (edges_[e].from == n) ends.push_back({e, true});
      if (edges_[e].to == n) ends.push_back({e, false});
    }
    if (ends.size() < 3) continue;
    Intersection ix;
    ix.node = n;
    ix.sharpness = std::numeric_limits<double>::infinity();
    for (const End& a : ends) ix.edges.push_back(a.edge);
    for (const End& in : ends) {
      // Arriving at this node along edge `in`: forward when the node is its `to`.
      bool in_forward = !in.is_start;
      if (!in_forward && !edges_[in.edge].bidirectional) continue;
      double h_in = arrival_heading(edges_[in.edge], in_forward);
      for (const End& out : ends) {
        if (out.edge == in.edge && out.is_start == in.is_start) continue;
        bool out_forward = out.is_start;
        if (!out_forward && !edges_[out.edge].bidirectional) continue;
        double h_out = departure_heading(edges_[out.edge], out_forward);
        double defl = wrap_angle(h_out - h_in);
        if (std::abs(defl) > options_.max_turn_deflection) continue;
        TurnMovement m;
        m.from_edge = in.edge;
        m.from_forward = in_forward;
        m.to_edge = out.edge;
        m.to_forward = out_forward;
        m.deflection = defl;
        if (std::abs(defl) <= options_.straight_tolerance) {
          m.side = Turn::Straight;
        } else {
          m.side = defl > 0.0 ? Turn::Left : Turn::Right;
          ix.sharpness = std::min(ix.sharpness, std::abs(defl));
        }
        ix.turns.push_back(m);
      }
    }
    if (!std::isfinite(ix.sharpness)) ix.sharpness = 0.0;
    intersections_.push_back(std::move(ix));
  }
}

void MineMap::build_walls() {
  walls_.clear();
  SegmentGrid centers(25.0);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const Polyline& c = edges_[e].centerline;
    for (std::size_t i = 0; i < c.segment_count(); ++i)
      centers.add({c.segment_start(i), c.segment_end(i)}, static_cast<std::uint32_t>(e));
  }
  std::vector<Vec2> junctions;
  for (const Intersection& ix : intersections_) junctions.push_back(nodes_[ix.node].position);

  auto node_degree = [&](int n) {
    int d = 0;
    for (const Edge& e : edges_)
      if (!e.centerline.closed()) d += (e.from == n) + (e.to == n);
    return d;
  };

  std::vector<std::uint32_t> ids;
  auto keep_point = [&](Vec2 p) {
    for (Vec2 j : junctions)
      if (norm(p - j) < options_.junction_clearance) return false;
    centers.query(p, 15.0, ids);
    for (std::uint32_t id : ids) {
      const Segment& s = centers.segment(id);
      double half = edges_[centers.tag(id)].width * 0.5;
      if (point_segment_distance(p, s.a, s.b) < half - 0.05) return false;
    }
    return true;
  };

  for (const Edge& edge : edges_) {
    Polyline line = edge.centerline.resampled(options_.wall_step);
    std::vector<Vec2> pts = line.points();
    bool closed = line.closed();
    double half = edge.width * 0.5;
    if (!closed) {
      // Dead ends get walls that run past the end of the road and a cap across it.
      auto extend = [&](bool at_end) {
        int node = at_end ? edge.to : edge.from;
        return node_degree(node) == 1;
      };
      if (extend(false)) {
        Vec2 d = pts[0] - pts[1];
        d = d * (1.0 / norm(d));
        pts.insert(pts.begin(), pts[0] + d * options_.dead_end_overrun);
      }
      if (extend(true)) {
        std::size_t n = pts.size();
        Vec2 d = pts[n - 1] - pts[n - 2];
        d = d * (1.0 / norm(d));
        pts.push_back(pts[n - 1] + d * options_.dead_end_overrun);
      }
    }
    std::size_t n = pts.size();
    for (int side : {1, -1}) {
      std::vector<Vec2> offs(n);
      std::vector<bool> keep(n);
      for (std::size_t i = 0; i < n; ++i) {
        Vec2 prev = (i == 0) ? (closed ? pts[n - 1] : pts[0]) : pts[i - 1];
        Vec2 next = (i + 1 == n) ? (closed ? pts[0] : pts[n - 1]) : pts[i + 1];
        Vec2 t = next - prev;
        t = t * (1.0 / norm(t));
        offs[i] = pts[i] + left_normal(t) * (half * side);
        keep[i] = keep_point(offs[i]);
      }
      // Rotate a closed ring so that runs do not straddle the seam.
      std::size_t start = 0;
      if (closed) {
        for (std::size_t i = 0; i < n; ++i)
          if (!keep[i]) {
            start = i;
            break;
          }
      }
      std::vector<Vec2> run;
      bool all_kept = closed && std::all_of(keep.begin(), keep.end(), [](bool k) { return k; });
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t i = (start + j) % n;
        if (keep[i]) {
          run.push_back(offs[i]);
        } else {
          if (run.size() >= 2) walls_.push_back(run);
          run.clear();
        }
      }
      if (all_kept) run.push_back(offs[start]);
      if (run.size() >= 2) walls_.push_back(run);
    }
    if (!closed) {
      for (bool at_end : {false, true}) {
        int node = at_end ? edge.to : edge.from;
        if (node_degree(node) != 1) continue;
        Vec2 tip = at_end ? pts.back() : pts.front();
        Vec2 inner = at_end ? pts[n - 2] : pts[1];
        Vec2 t = tip - inner;
        t = t * (1.0 / norm(t));
        Vec2 l = left_normal(t) * half;
        walls_.push_back({tip + l, tip - l});
      }
    }
  }
}

void MineMap::build_grids() {
  wall_grid_ = SegmentGrid(25.0);
  centerline_grid_ = SegmentGrid(25.0);
  for (std::size_t w = 0; w < walls_.size(); ++w)
    for (std::size_t i = 0; i + 1 < walls_[w].size(); ++i)
      wall_grid_.add({walls_[w][i], walls_[w][i + 1]}, static_cast<std::uint32_t>(w));
  centerline_offset_.clear();
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const Polyline& c = edges_[e].centerline;
    centerline_offset_.push_back(static_cast<std::uint32_t>(centerline_grid_.size()));
    for (std::size_t i = 0; i < c.segment_count(); ++i)
      centerline_grid_.add({c.segment_start(i), c.segment_end(i)}, static_cast<std::uint32_t>(e));
  }
}

MineMap::NearestCenterline MineMap::nearest_centerline(Vec2 p, double radius) const {
  NearestCenterline best;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> ids;
  centerline_grid_.query(p, radius, ids);
  int best_edge = -1;
  std::uint32_t best_id = 0;
  for (std::uint32_t id : ids) {
    const Segment& s = centerline_grid_.segment(id);
    double d = point_segment_distance(p, s.a, s.b);
    if (d < best_d) {
      best_d = d;
      best_id = id;
      best_edge = static_cast<int>(centerline_grid_.tag(id));
    }
  }
  if (best_edge < 0) return best;
  const Polyline& c = edges_[best_edge].centerline;
  std::size_t seg = best_id - centerline_offset_[best_edge];
  best.edge = best_edge;
  best.projection = c.project(p, c.cumulative()[seg], 1e-9);
  return best;
}

void MineMap::validate(double truck_width) const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.centerline.points().size() < 2 || !(edge.centerline.length() > 0.0))
      throw InvalidInput("edge " + std::to_string(e) + " has a degenerate centerline");
    const auto& cum = edge.centerline.cumulative();
    for (std::size_t i = 1; i < cum.size(); ++i)
      if (!(cum[i] > cum[i - 1]))
        throw InvalidInput("edge " + std::to_string(e) + " has non-increasing arc length");
    if (!(edge.width > truck_width))
      throw InvalidInput("edge " + std::to_string(e) + " is narrower than the truck");
  }
  std::vector<std::uint32_t> ids;
  for (std::size_t w = 0; w < walls_.size(); ++w) {
    for (std::size_t i = 0; i + 1 < walls_[w].size(); ++i) {
      Vec2 a = walls_[w][i];
      Vec2 b = walls_[w][i + 1];
      Vec2 mid = (a + b) * 0.5;
      centerline_grid_.query(mid, norm(b - a) * 0.5 + 1.0, ids);
      for (std::uint32_t id : ids) {
        const Segment& s = centerline_grid_.segment(id);
        if (segments_intersect(a, b, s.a, s.b))
          throw InvalidInput("wall " + std::to_string(w) + " crosses a road centerline");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Procedural test maps

namespace {

class Turtle {
 public:
  Turtle(Vec2 p, double heading) : pos_(p), heading_(heading) { pts_.push_back(p); }

  void straight(double len) {
    int n = std::max(1, static_cast<int>(std::round(len)));
    Vec2 start = pos_;
    for (int i = 1; i <= n; ++i) pts_.push_back(start + unit(heading_) * (len * i / n));
    pos_ = pts_.back();
  }

  /// Arc turning by `angle` (left positive) with the given radius.
  void arc(double angle, double radius) {
    double len = std::abs(angle) * radius;
    int n = std::max(2, static_cast<int>(std::round(len)));
    double sign = angle > 0.0 ? 1.0 : -1.0;
    Vec2 center = pos_ + left_normal(unit(heading_)) * (radius * sign);
    double h0 = heading_;
    for (int i = 1; i <= n; ++i) {
      double h = h0 + angle * i / n;
      pts_.push_back(center - left_normal(unit(h)) * (radius * sign));
    }
    heading_ = h0 + angle;
    pos_ = pts_.back();
  }

  double s() const {
    double total = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) total += norm(pts_[i] - pts_[i - 1]);
    return total;
  }
  std::vector<Vec2>& points() { return pts_; }
  Vec2 position() const { return pos_; }

 private:
  Vec2 pos_;
  double heading_;
  std::vector<Vec2> pts_;
};

constexpr double deg(double d) { return d * kPi / 180.0; }

}  // namespace

MineMap build_loop_map() {
  Turtle t({0.0, 0.0}, 0.0);
  for (int half = 0; half < 2; ++half) {
    t.straight(300.0);
    t.arc(deg(90), 60.0);
    t.straight(100.0);
    t.arc(deg(45), 60.0);
    t.arc(deg(-90), 60.0);
    t.arc(deg(45), 60.0);
    t.straight(100.0);
    t.arc(deg(90), 60.0);
  }
  std::vector<Vec2> pts = t.points();
  pts.pop_back();  // coincides with the start up to rounding
  Edge loop;
  loop.from = 0;
  loop.to = 0;
  loop.centerline = Polyline(std::move(pts), true);
  loop.width = 12.0;
  loop.bidirectional = true;
  return MineMap("loop", {Node{{0.0, 0.0}}}, {loop}, {0});
}

MineMap build_network_map() {
  // Ring road: rounded rectangle 3000 m x 1500 m, counter-clockwise.
  constexpr double kW = 3000.0, kH = 1500.0, kR = 150.0;
  Turtle t({kR, 0.0}, 0.0);
  t.straight(kW - 2 * kR);
  t.arc(deg(90), kR);
  t.straight(kH - 2 * kR);
  t.arc(deg(90), kR);
  t.straight(kW - 2 * kR);
  t.arc(deg(90), kR);
  t.straight(kH - 2 * kR);
  t.arc(deg(90), kR);
  std::vector<Vec2> ring = t.points();
  ring.pop_back();

  // Junction positions on the ring and the angle each spur leaves at, measured
  // clockwise from the counter-clockwise ring tangent (i.e. outward).
  const std::vector<Vec2> junction_points{{800.0, 0.0},   {2000.0, 0.0}, {kW, 750.0},
                                          {2200.0, kH},   {1000.0, kH},  {0.0, 750.0}};
  const std::vector<double> spur_angles{deg(45), deg(50), deg(40), deg(80), deg(55), deg(85)};
  constexpr double kSpurLength = 400.0;

  std::vector<std::size_t> idx;
  for (Vec2 j : junction_points) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      double d = norm(ring[i] - j);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    idx.push_back(best);
  }

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < idx.size(); ++k) nodes.push_back({ring[idx[k]]});
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::size_t a = idx[k];
    std::size_t b = idx[(k + 1) % idx.size()];
    std::vector<Vec2> pts;
    for (std::size_t i = a;; i = (i + 1) % ring.size()) {
      pts.push_back(ring[i]);
      if (i == b) break;
    }
    Edge e;
    e.from = static_cast<int>(k);
    e.to = static_cast<int>((k + 1) % idx.size());
    e.centerline = Polyline(std::move(pts));
    edges.push_back(std::move(e));
  }
  std::vector<int> sites;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::size_t i = idx[k];
    Vec2 tangent = ring[(i + 1) % ring.size()] - ring[(i + ring.size() - 1) % ring.size()];
    double heading = std::atan2(tangent.y, tangent.x) - spur_angles[k];
    Turtle s(ring[i], heading);
    s.straight(kSpurLength);
    nodes.push_back({s.position()});
    Edge e;
    e.from = static_cast<int>(k);
    e.to = static_cast<int>(nodes.size() - 1);
    e.centerline = Polyline(s.points());
    edges.push_back(std::move(e));
    sites.push_back(e.to);
  }
  return MineMap("network", std::move(nodes), std::move(edges), std::move(sites));
}

TestMaps build_test_maps() { return {build_loop_map(), build_network_map()}; }

}  // namespace minehaul::world
