#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "minehaul/bench/benchmark.hpp"
#include "minehaul/data/collect.hpp"
#include "minehaul/data/labels.hpp"
#include "minehaul/model/fusion_planner.hpp"
#include "minehaul/objectives/trainer.hpp"

namespace minehaul::cli {

/// Everything a run needs. Sensor beams and K live in [sim] and [data]; the
/// model, collector and benchmark copies are synced by `resolved`.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string maps = "both";  // loop, network or both
  world::TruckParams truck;
  expert::SimConfig sim;
  expert::ExpertParams expert;
  data::CollectConfig collect;
  int K = 5;
  double spacing = 1.0;
  double confidence = 0.99;
  model::ModelConfig model;
  objectives::TrainConfig train;
  deploy::FusionMode mode = deploy::FusionMode::Evidential;
  double hlc_activation = 50.0;
  bench::TaskSpec bench;
  int bench_seeds = 20;
  double bench_min_success = 0.0;  // bench exits with the threshold code below this success rate

  /// Copy with the shared settings pushed into the nested configs.
  RunConfig resolved() const;
};

struct ConfigKey {
  std::string name;  // section.key
  std::string doc;
  std::string default_value;
};

/// Every accepted key with its default, in file order.
std::vector<ConfigKey> config_keys();

/// Flat INI: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// ConfigError naming the line for unknown keys or malformed values.
void apply_ini(RunConfig& cfg, const std::string& text);
/// IoError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);
/// MINEHAUL_<SECTION>_<KEY> variables; unknown MINEHAUL_ names are rejected.
void apply_env(RunConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> minehaul_environment();

/// Sets one `section.key`. ConfigError on unknown keys or bad values.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const RunConfig& cfg, const std::string& key);

/// Canonical text: every key, defaults included. Loading it reproduces cfg.
std::string to_ini(const RunConfig& cfg);

/// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);
std::string config_hash(const RunConfig& cfg);
/// Hash over the sections that shape data and model ([truck] [sim] [expert]
/// [collect] [data] [model] [train]); checkpoints are matched against it.
std::string training_hash(const RunConfig& cfg);

}  // namespace minehaul::cli
