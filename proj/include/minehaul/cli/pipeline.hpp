#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "minehaul/bench/benchmark.hpp"
#include "minehaul/cli/config.hpp"
#include "minehaul/data/filter.hpp"
#include "minehaul/objectives/trainer.hpp"

namespace minehaul::cli {

namespace fs = std::filesystem;

/// Artifact names inside an output directory.
struct Layout {
  fs::path dir;
  fs::path config() const { return dir / "config.ini"; }
  fs::path demos() const { return dir / "demos.jsonl"; }
  fs::path filtered() const { return dir / "filtered.jsonl"; }
  fs::path filter_report() const { return dir / "filter_report.json"; }
  fs::path checkpoint() const { return dir / "model.ckpt"; }
  fs::path trace() const { return dir / "trace.csv"; }
  fs::path trajectory() const { return dir / "trajectory.csv"; }
  fs::path events() const { return dir / "events.jsonl"; }
  fs::path eval() const { return dir / "eval.json"; }
  fs::path bench() const { return dir / "bench"; }
};

/// Writes the effective config next to the artifacts.
void write_config(const RunConfig& cfg, const Layout& out);

void map_gen(const RunConfig& cfg, const Layout& out);

struct CollectSummary {
  std::size_t episodes = 0;
  std::size_t frames = 0;
};
CollectSummary collect(const RunConfig& cfg, const Layout& out);

struct FilterSummary {
  data::FilterThresholds thresholds;
  data::FilterReport report;
};
/// Reads `input` (default: demos in `out`), writes the filtered set and report.
FilterSummary filter(const RunConfig& cfg, const Layout& out, std::optional<fs::path> input = std::nullopt);

struct TrainSummary {
  std::size_t samples = 0;
  objectives::TrainResult result;
};
/// Reads `input` (default: filtered set in `out`); writes checkpoint and trace.
TrainSummary train(const RunConfig& cfg, const Layout& out, std::optional<fs::path> input = std::nullopt,
                   const std::function<void(const objectives::TraceRow&)>& on_epoch = {});

/// Loads a planner and checks its training hash against cfg unless forced.
/// ConfigError on mismatch.
model::FusionPlanner load_planner(const RunConfig& cfg, const fs::path& checkpoint, bool force);

struct EvalSummary {
  deploy::EpisodeResult result;
};
/// One lane-stable episode on the loop map with the configured fusion mode.
EvalSummary eval(const RunConfig& cfg, const Layout& out, const model::FusionPlanner& planner);

/// Runs the configured task and writes its report under out/bench.
bench::BenchmarkReport run_bench(const RunConfig& cfg, const Layout& out, const bench::PolicyFactory& policy,
                                 const std::string& checkpoint);

}  // namespace minehaul::cli
