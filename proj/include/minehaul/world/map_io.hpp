#pragma once

#include <filesystem>

#include <json.hpp>

#include "minehaul/world/map.hpp"

namespace minehaul::world {

/// Map file schema: `nodes` ([x, y] pairs), `edges` (from, to, centerline,
/// width, bidirectional, closed), `intersections` (derived, informational),
/// `sites`. Lengths in meters, angles in radians.
nlohmann::json map_to_json(const MineMap& map);
MineMap map_from_json(const nlohmann::json& j);

void save_map(const MineMap& map, const std::filesystem::path& path);
MineMap load_map(const std::filesystem::path& path);

}  // namespace minehaul::world
