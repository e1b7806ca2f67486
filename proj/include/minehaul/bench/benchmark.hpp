#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "minehaul/deploy/executor.hpp"
#include "minehaul/world/map.hpp"

namespace minehaul::bench {

using deploy::FusionMode;

enum class TaskKind { LaneStable, Disturbance, Navigation };
enum class Direction { CounterClockwise, Clockwise, Both, Alternate };  // Alternate: by seed index

const char* to_string(TaskKind k);
const char* to_string(Direction d);
TaskKind task_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

inline constexpr const char* kReportSchema = "minehaul.bench/1";

struct TaskSpec {
  TaskKind kind = TaskKind::LaneStable;
  std::string map_id;              // loop_map or network_map; empty picks the task default
  Direction direction = Direction::Both;
  double gnss_failure = 0.0;
  std::vector<std::uint64_t> seeds;
  FusionMode mode = FusionMode::Evidential;
  double distance = 1500.0;        // lane-stable episode length, m
  double min_route_length = 1000.0;
  int trials = 30;                 // disturbance trials per class
  double max_yaw_deg = 10.0;
  double max_lateral = 1.0;
  double recovery_window = 20.0;   // s
  double safe_lateral = 0.5;
  double safe_heading_deg = 10.0;
  double safe_hold = 1.0;          // s
  bool keep_trajectories = false;
  int jobs = 1;
};

/// Rejects specs that cannot produce a valid benchmark (no seeds, too few trials).
void validate(const TaskSpec& spec);

struct IntersectionResult {
  int intersection = -1;
  std::string side;       // straight, left, right
  std::string direction;  // ccw or cw travel around the map centroid
  double deflection_deg = 0.0;
  bool passed = false;
};

struct EpisodeRecord {
  std::string scenario;   // ccw / cw, straight / left / right, or the route's site pair
  std::uint64_t seed = 0;
  int trial = 0;
  int collisions = 0;
  int interventions = 0;
  int gnss_losses = 0;
  bool success = false;
  double completion = 0.0;  // in [0, 1]
  double distance = 0.0;    // route progress, m
  double recovery_time = -1.0;  // disturbance: time the safe state was first held, -1 when never
  std::vector<IntersectionResult> intersections;
  std::vector<deploy::Event> events;  // collision and intervention positions
  std::vector<deploy::TrajectoryRow> trajectory;

  /// Collisions plus interventions: the markers drawn on a trajectory map.
  int event_count() const { return collisions + interventions; }
};

struct BenchmarkReport {
  TaskKind kind = TaskKind::LaneStable;
  FusionMode mode = FusionMode::Evidential;
  std::string map_id;
  double gnss_failure = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeRecord> episodes;
  std::map<std::string, double> aggregates;
  std::vector<std::string> notes;
};

/// Recomputes every aggregate from the episodes.
std::map<std::string, double> aggregate(TaskKind kind, const std::vector<EpisodeRecord>& episodes);

/// Builds the policy for one episode on `route`.
using PolicyFactory = std::function<std::unique_ptr<deploy::Policy>(const expert::Route& route)>;

PolicyFactory expert_factory(int K = 5);
PolicyFactory planner_factory(const model::FusionPlanner& planner);

struct BenchEnv {
  const world::TestMaps* maps = nullptr;
  world::TruckParams truck;
  expert::SimConfig sim;
  expert::ExpertParams expert;
};

/// Loop laps in each requested direction; one episode per (seed, direction).
BenchmarkReport run_lane_stable(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy);
/// `spec.trials` perturbed starts per class and seed on loop-map straights, left and right curves.
BenchmarkReport run_disturbance(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy);
/// One random site-to-site route per seed with at least one turning intersection.
BenchmarkReport run_navigation(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy);
BenchmarkReport run_task(const TaskSpec& spec, const BenchEnv& env, const PolicyFactory& policy);

/// Disturbance start positions by class: arc lengths on `route` whose next
/// 30 m are straight, curve left or curve right.
std::map<std::string, std::vector<double>> disturbance_sites(const expert::Route& route);

/// Lower end of the one-sided bootstrap interval of mean(a) - mean(b),
/// resampling each group independently.
double bootstrap_lower_bound(const std::vector<double>& a, const std::vector<double>& b, double confidence,
                             int resamples, std::uint64_t seed);

struct ReportMeta {
  std::string config_hash;
  std::string checkpoint;
  std::string version = "1";
};

/// report.json, episodes.csv, intersections.csv, events.csv and one
/// trajectory CSV per episode that kept its trajectory. IoError when the
/// directory cannot be written.
void emit_report(const std::vector<BenchmarkReport>& reports, const std::filesystem::path& dir,
                 const ReportMeta& meta = {});

inline constexpr const char* kEpisodesHeader =
    "task,mode,gnss_failure,scenario,seed,trial,collisions,interventions,gnss_losses,success,completion,distance,"
    "recovery_time";
inline constexpr const char* kIntersectionsHeader =
    "task,mode,gnss_failure,scenario,seed,intersection,side,direction,deflection_deg,passed";
inline constexpr const char* kEventsHeader = "task,mode,gnss_failure,scenario,seed,trial,kind,s,t,x,y";

}  // namespace minehaul::bench
