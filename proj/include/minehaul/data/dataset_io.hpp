#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "minehaul/data/filter.hpp"
#include "minehaul/data/labels.hpp"

namespace minehaul::data {

struct Manifest {
  std::string kind = "demonstrations";  // or "samples"
  std::uint64_t seed = 0;
  std::string config_hash;
  std::optional<FilterThresholds> thresholds;
  AugmentParams augmentation;
  int K = 0;
  double spacing = 0.0;
  std::size_t count = 0;
  bool operator==(const Manifest&) const = default;
};

/// `<file>.manifest.json` next to a JSON Lines file.
std::filesystem::path manifest_path(const std::filesystem::path& jsonl);

nlohmann::json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

/// One frame per line: t, s, scan, gnss, speed, hlc_lat, hlc_lon, str, acc,
/// dec_e, dec_m, plus episode and segment.
void write_demonstrations(const std::filesystem::path& path, const DemonstrationSet& demos);
DemonstrationSet read_demonstrations(const std::filesystem::path& path);

/// Same frame fields plus `K` and the flattened labels `y`.
void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples);
std::vector<TrainingSample> read_samples(const std::filesystem::path& path);

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
/// With `expected_hash`, a different config hash raises ConfigError.
Manifest read_manifest(const std::filesystem::path& path, const std::optional<std::string>& expected_hash = std::nullopt);

}  // namespace minehaul::data
