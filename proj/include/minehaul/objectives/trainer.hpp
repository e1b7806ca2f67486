#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "minehaul/data/demonstration.hpp"
#include "minehaul/data/labels.hpp"
#include "minehaul/model/fusion_planner.hpp"
#include "minehaul/nn/optim.hpp"
#include "minehaul/objectives/losses.hpp"

namespace minehaul::objectives {

struct TrainConfig {
  int epochs = 40;
  std::size_t batch = 32;
  double lr0 = 2e-4;
  nn::AdamConfig adam;
  LossConfig loss;
  bool augment = true;
  double augment_prob = 0.5;  // share of drawn samples that get augmented
  data::AugmentParams augmentation;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;  // written every `checkpoint_every` epochs and at the end
  int checkpoint_every = 10;
  std::string config_hash;
};

struct TraceRow {
  int epoch = 0;
  std::uint64_t step = 0;
  double total = 0.0, mae = 0.0, nll = 0.0, reg = 0.0, log_sigma_term = 0.0, speed = 0.0, lr = 0.0;
  std::array<double, kChannels> sigma{};
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::array<double, kChannels> log_variance{};
};

/// Builds targets for a batch; labels must have the model's K.
Targets make_targets(std::span<const data::TrainingSample> samples, int K);

/// Mini-batch ADAM over shuffled samples with cosine decay from lr0 to 0 at
/// the final step. Each row of the trace holds epoch means. On divergence the
/// DivergenceError names the last checkpoint written.
TrainResult train(model::FusionPlanner& model, const std::vector<data::TrainingSample>& samples,
                  const TrainConfig& cfg, const std::function<void(const TraceRow&)>& on_epoch = {});

/// Loss averaged over `samples` without updating anything (no augmentation).
LossBreakdown evaluate_loss(const model::FusionPlanner& model, const std::vector<data::TrainingSample>& samples,
                            std::span<const double> log_variance, const LossConfig& cfg, std::size_t batch = 256);

inline constexpr const char* kTraceHeader =
    "epoch,step,total,mae,nll,reg,log_sigma_term,speed,lr,sigma_str,sigma_acc,sigma_dec_e,sigma_dec_m";
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

}  // namespace minehaul::objectives
