#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "minehaul/deploy/fusion.hpp"
#include "minehaul/expert/driver.hpp"
#include "minehaul/expert/simulation.hpp"
#include "minehaul/model/fusion_planner.hpp"

namespace minehaul::deploy {

/// Ground truth handed to policies alongside the observation. Learned
/// policies must only read `obs`.
struct PolicyInput {
  const Observation& obs;
  const world::TruckState& truth;
  double route_s;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual model::EvidentialPrediction predict(const PolicyInput& in) = 0;
  /// Called after an intervention reset.
  virtual void reset(const world::TruckState&) {}
  virtual int K() const = 0;
};

class PlannerPolicy : public Policy {
 public:
  explicit PlannerPolicy(const model::FusionPlanner& planner) : planner_(&planner) {}
  model::EvidentialPrediction predict(const PolicyInput& in) override;
  int K() const override { return planner_->config().K; }

 private:
  const model::FusionPlanner* planner_;
};

/// The scripted expert wrapped as a confident K-step prediction of its
/// current command.
class ExpertPolicy : public Policy {
 public:
  ExpertPolicy(const expert::Route& route, world::TruckParams truck = {}, expert::ExpertParams params = {}, int K = 5);
  model::EvidentialPrediction predict(const PolicyInput& in) override;
  void reset(const world::TruckState& s) override { driver_.reset(s); }
  int K() const override { return K_; }

 private:
  expert::ExpertDriver driver_;
  int K_;
};

struct Event {
  std::string kind;  // collision, intervention, gnss_loss, safety_stop
  double s = 0.0;    // odometer
  double t = 0.0;
  double x = 0.0, y = 0.0;
};

struct TrajectoryRow {
  double t = 0.0, x = 0.0, y = 0.0, heading = 0.0, speed = 0.0;
  ControlCommand cmd;
  double lat_err = 0.0, head_err = 0.0;
  std::string event;
};

struct EpisodeConfig {
  FusionMode mode = FusionMode::Evidential;
  double max_time = 600.0;        // s
  double distance = 0.0;          // stop after this much route progress; 0 = route end or max_time
  double end_margin = 25.0;       // open routes stop this far before the end
  double hlc_activation = 50.0;
  bool interventions = true;      // reset to the reference line on an intervention
  double heading_limit = world::kPi / 2.0;
  bool log_trajectory = true;
  expert::ExpertParams expert;    // HLC speed profile
};

struct EpisodeResult {
  std::vector<TrajectoryRow> trajectory;  // one row per physics step
  std::vector<Event> events;
  std::size_t inferences = 0;
  std::size_t physics_steps = 0;
  int collisions = 0;
  int interventions = 0;
  int gnss_losses = 0;
  bool failed = false;     // safety stop
  bool completed = false;  // reached the distance / route end
  double progress = 0.0;   // route progress, m
  double odometer = 0.0;
  std::size_t buffer_reads = 0;
  std::size_t max_buffer_entries = 0;
};

/// Per physics step view for benchmark hooks. Returning false ends the episode.
struct TickInfo {
  const world::TruckState& state;
  double lat_err;
  double head_err;
  double progress;
  double route_s;
  bool collision;
  bool intervention;
};

/// 10 Hz sensing + inference + ingest, 50 Hz dynamics with zero-order hold
/// on the fused command, re-fused whenever the truck enters a new 1 m bin.
/// Synchronous: deterministic for a given simulator seed.
EpisodeResult run_executor(expert::Simulator& sim, const expert::Route& route, Policy& policy,
                           const EpisodeConfig& cfg, const std::function<bool(const TickInfo&)>& on_tick = {});

inline constexpr const char* kTrajectoryHeader =
    "t,x,y,heading,speed,steer_cmd,acc_cmd,dec_e_cmd,dec_m_cmd,lat_err,head_err,event";
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);
void write_events_jsonl(const std::filesystem::path& path, const std::vector<Event>& events);

}  // namespace minehaul::deploy
