#include "minehaul/world/map_io.hpp"

#include <fstream>

#include "minehaul/errors.hpp"

namespace minehaul::world {

using nlohmann::json;

namespace {

json point(Vec2 p) { return json::array({p.x, p.y}); }
Vec2 point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

json map_to_json(const MineMap& map) {
  json j;
  j["schema"] = "minehaul.map/1";
  j["name"] = map.name();
  j["nodes"] = json::array();
  for (const Node& n : map.nodes()) j["nodes"].push_back(point(n.position));
  j["edges"] = json::array();
  for (const Edge& e : map.edges()) {
    json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je["width"] = e.width;
    je["bidirectional"] = e.bidirectional;
    je["closed"] = e.centerline.closed();
    je["centerline"] = json::array();
    for (Vec2 p : e.centerline.points()) je["centerline"].push_back(point(p));
    j["edges"].push_back(std::move(je));
  }
  j["intersections"] = json::array();
  for (const Intersection& ix : map.intersections()) {
    json ji;
    ji["node"] = ix.node;
    ji["edges"] = ix.edges;
    ji["sharpness"] = ix.sharpness;
    ji["turns"] = json::array();
    for (const TurnMovement& m : ix.turns) {
      ji["turns"].push_back({{"from_edge", m.from_edge},
                             {"from_forward", m.from_forward},
                             {"to_edge", m.to_edge},
                             {"to_forward", m.to_forward},
                             {"side", to_string(m.side)},
                             {"deflection", m.deflection}});
    }
    j["intersections"].push_back(std::move(ji));
  }
  j["sites"] = map.sites();
  return j;
}

MineMap map_from_json(const json& j) {
  try {
    std::vector<Node> nodes;
    for (const json& n : j.at("nodes")) nodes.push_back({point(n)});
    std::vector<Edge> edges;
    for (const json& je : j.at("edges")) {
      Edge e;
      e.from = je.at("from").get<int>();
      e.to = je.at("to").get<int>();
      e.width = je.at("width").get<double>();
      e.bidirectional = je.value("bidirectional", true);
      std::vector<Vec2> pts;
      for (const json& p : je.at("centerline")) pts.push_back(point(p));
      e.centerline = Polyline(std::move(pts), je.value("closed", false));
      edges.push_back(std::move(e));
    }
    std::vector<int> sites = j.value("sites", std::vector<int>{});
    return MineMap(j.value("name", std::string("map")), std::move(nodes), std::move(edges), std::move(sites));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed map: ") + e.what());
  }
}

void save_map(const MineMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << map_to_json(map).dump(1) << '\n';
}

MineMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed map file: ") + e.what());
  }
  return map_from_json(j);
}

}  // namespace minehaul::world
