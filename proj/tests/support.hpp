#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "minehaul/data/demonstration.hpp"
#include "minehaul/model/fusion_planner.hpp"
#include "minehaul/nn/gradcheck.hpp"
#include "minehaul/nn/optim.hpp"
#include "minehaul/objectives/losses.hpp"
#include "minehaul/world/sensors.hpp"

namespace support {

using namespace minehaul;

inline model::ModelConfig small_config(int K = 3) {
  model::ModelConfig c;
  c.beams = 12;
  c.K = K;
  c.scan_hidden = {10, 9};
  c.meas_hidden = {11, 10, 8};
  c.trunk_hidden = {12, 9};
  c.speed_hidden = 6;
  c.branch_hidden = 7;
  return c;
}

inline Observation random_observation(int beams, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Observation o;
  o.scan.beams = beams;
  o.scan.fov = 1.5 * world::kPi;
  for (int i = 0; i < beams; ++i) {
    bool valid = u(rng) < 0.8;
    o.scan.valid.push_back(valid);
    o.scan.ranges.push_back(valid ? world::quantize_range(4.0 + 116.0 * u(rng)) : world::kScanMaxRange);
  }
  o.gnss.valid = u(rng) < 0.9;
  if (o.gnss.valid) o.gnss.position = {2000.0 * u(rng) - 1000.0, 2000.0 * u(rng) - 1000.0};
  o.speed = 6.0 * u(rng);
  o.hlc.lateral = static_cast<expert::LateralCommand>(static_cast<int>(3 * u(rng)) % 3);
  o.hlc.longitudinal = static_cast<expert::LongitudinalCommand>(static_cast<int>(3 * u(rng)) % 3);
  return o;
}

inline data::TrainingSample random_sample(int beams, int K, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  data::TrainingSample s;
  s.obs = random_observation(beams, rng);
  s.K = K;
  s.y.resize(kChannels * K);
  for (int k = 0; k < K; ++k) {
    s.label(0, k) = 2.0 * u(rng) - 1.0;
    for (std::size_t c = 1; c < kChannels; ++c) s.label(c, k) = u(rng) < 0.3 ? 0.0 : u(rng);
  }
  return s;
}

/// Two regression tasks sharing one network, weighted by learned log-variances
/// with the two-task uncertainty loss. Returns the learned (s_a, s_b).
inline std::array<double, 2> two_task_experiment(std::uint64_t seed, double noise_a, double noise_b, int steps = 1500) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  nn::ParamStore store;
  nn::Sequential net("two", {nn::LayerSpec::dense(3, 32), nn::LayerSpec::act(nn::Activation::Tanh, 32),
                             nn::LayerSpec::dense(32, 2)},
                     store);
  net.init(store, rng);
  nn::ParamStore task;
  task.add("s", {2});
  const std::size_t n = 64;
  for (int step = 0; step < steps; ++step) {
    nn::Matrix x(n, 3), y(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) x(i, j) = u(rng);
      y(i, 0) = 0.5 * std::sin(1.5 * x(i, 0)) + 0.3 * x(i, 1) + noise_a * g(rng);
      y(i, 1) = 0.4 * std::cos(2.0 * x(i, 2)) - 0.2 * x(i, 0) + noise_b * g(rng);
    }
    nn::Sequential::Tape tape;
    const nn::Matrix& p = net.forward(store, x, tape);
    std::array<double, 2> mse{};
    for (std::size_t i = 0; i < n; ++i)
      for (int t = 0; t < 2; ++t) mse[t] += std::pow(p(i, t) - y(i, t), 2) / n;
    std::array<double, 2> dl{}, ds{};
    objectives::task_weighting(mse, task[0].value, dl, ds);
    nn::Matrix dp(n, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (int t = 0; t < 2; ++t) dp(i, t) = dl[t] * 2.0 * (p(i, t) - y(i, t)) / n;
    net.backward(store, tape, dp, nullptr);
    task[0].grad = {ds[0], ds[1]};
    nn::adam_step(store, 1e-2);
    nn::adam_step(task, 1e-2);
  }
  return {task[0].value[0], task[0].value[1]};
}

}  // namespace support
