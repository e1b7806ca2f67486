#include "minehaul/objectives/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "minehaul/errors.hpp"

namespace minehaul::objectives {

using data::TrainingSample;

Targets make_targets(std::span<const TrainingSample> samples, int K) {
  Targets t;
  t.y.resize(samples.size(), kChannels * K);
  t.speed.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].K != K || samples[i].y.size() != kChannels * static_cast<std::size_t>(K))
      throw DimensionError("sample has K = " + std::to_string(samples[i].K) + ", model expects " + std::to_string(K));
    std::copy(samples[i].y.begin(), samples[i].y.end(), t.y.row(i));
    t.speed[i] = samples[i].obs.speed / model::kSpeedScale;
  }
  return t;
}

namespace {

std::vector<Observation> observations(std::span<const TrainingSample> s) {
  std::vector<Observation> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(x.obs);
  return out;
}

void accumulate(TraceRow& row, const LossBreakdown& b, double w) {
  row.total += w * b.total;
  row.mae += w * b.mae_sum();
  row.nll += w * b.nll_sum();
  row.reg += w * b.reg_sum();
  row.log_sigma_term += w * b.log_sigma_term;
  row.speed += w * b.speed;
}

}  // namespace

TrainResult train(model::FusionPlanner& model, const std::vector<TrainingSample>& samples, const TrainConfig& cfg,
                  const std::function<void(const TraceRow&)>& on_epoch) {
  if (samples.empty()) throw InsufficientData("training set is empty");
  if (cfg.epochs < 1 || cfg.batch < 1) throw InvalidInput("epochs and batch size must be positive");
  const int K = model.config().K;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  nn::ParamStore task;
  task.add("task.log_variance", {kChannels});
  const std::size_t per_epoch = (samples.size() + cfg.batch - 1) / cfg.batch;
  const std::size_t total_steps = per_epoch * static_cast<std::size_t>(cfg.epochs);
  std::string last_checkpoint = "none";

  auto save = [&](int epoch) {
    if (cfg.checkpoint.empty()) return;
    const auto& s = task[0].value;
    model.save(cfg.checkpoint.string(), {{"epoch", epoch},
                                         {"seed", cfg.seed},
                                         {"config_hash", cfg.config_hash},
                                         {"task_log_variance", s}});
    last_checkpoint = cfg.checkpoint.string();
  };

  TrainResult result;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingSample> batch;
  model::ForwardState st;
  LossGrad grad;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    TraceRow row;
    row.epoch = epoch;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch) {
      const std::size_t n = std::min(cfg.batch, order.size() - b0);
      batch.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const TrainingSample& src = samples[order[b0 + i]];
        if (cfg.augment && u(rng) < cfg.augment_prob)
          batch.push_back(data::augment(src, cfg.augmentation, rng));
        else
          batch.push_back(src);
      }
      model::Batch in = model.make_batch(observations(batch));
      Targets tg = make_targets(batch, K);
      const double lr = nn::cosine_lr(step, total_steps > 1 ? total_steps - 1 : 1, cfg.lr0);
      try {
        model.forward(in, st);
        LossBreakdown lb = multitask_loss(st.lat, st.lon, st.speed, K, tg, task[0].value, cfg.loss, &grad);
        model.backward(in, st, grad.d_lat, grad.d_lon, grad.d_speed);
        std::copy(grad.d_s.begin(), grad.d_s.end(), task[0].grad.begin());
        nn::adam_step(model.params(), lr, cfg.adam);
        nn::adam_step(task, lr, cfg.adam);
        accumulate(row, lb, static_cast<double>(n) / static_cast<double>(samples.size()));
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + " step " +
                              std::to_string(step) + "; last good checkpoint: " + last_checkpoint);
      }
      row.lr = lr;
      ++step;
    }
    row.step = step;
    for (std::size_t c = 0; c < kChannels; ++c) row.sigma[c] = std::exp(0.5 * task[0].value[c]);
    result.trace.push_back(row);
    if (on_epoch) on_epoch(row);
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs) save(epoch + 1);
  }
  save(cfg.epochs);
  std::copy(task[0].value.begin(), task[0].value.end(), result.log_variance.begin());
  return result;
}

LossBreakdown evaluate_loss(const model::FusionPlanner& model, const std::vector<TrainingSample>& samples,
                            std::span<const double> log_variance, const LossConfig& cfg, std::size_t batch) {
  if (samples.empty()) throw InsufficientData("evaluation set is empty");
  LossBreakdown acc;
  model::ForwardState st;
  for (std::size_t b0 = 0; b0 < samples.size(); b0 += batch) {
    const std::size_t n = std::min(batch, samples.size() - b0);
    std::span<const TrainingSample> part(samples.data() + b0, n);
    model::Batch in = model.make_batch(observations(part));
    model.forward(in, st);
    LossBreakdown lb = multitask_loss(st.lat, st.lon, st.speed, model.config().K, make_targets(part, model.config().K),
                                      log_variance, cfg);
    const double w = static_cast<double>(n) / static_cast<double>(samples.size());
    for (std::size_t c = 0; c < kChannels; ++c) {
      acc.mae[c] += w * lb.mae[c];
      acc.nll[c] += w * lb.nll[c];
      acc.reg[c] += w * lb.reg[c];
    }
    acc.speed += w * lb.speed;
  }
  std::array<double, kChannels> task{};
  for (std::size_t c = 0; c < kChannels; ++c) task[c] = acc.mae[c] + acc.nll[c] + acc.reg[c];
  double wl = task_weighting(task, log_variance);
  for (double v : log_variance) acc.log_sigma_term += 0.5 * v;
  acc.weighted = wl - acc.log_sigma_term;
  acc.total = acc.weighted + acc.log_sigma_term + cfg.speed_weight * acc.speed;
  return acc;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << kTraceHeader << "\n";
  os.precision(17);
  for (const TraceRow& r : trace) {
    os << r.epoch << ',' << r.step << ',' << r.total << ',' << r.mae << ',' << r.nll << ',' << r.reg << ','
       << r.log_sigma_term << ',' << r.speed << ',' << r.lr;
    for (double s : r.sigma) os << ',' << s;
    os << "\n";
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace minehaul::objectives
