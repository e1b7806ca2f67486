#include "minehaul/model/fusion_planner.hpp"

#include <cmath>

#include "minehaul/errors.hpp"
#include "minehaul/nn/checkpoint.hpp"
#include "minehaul/world/sensors.hpp"

namespace minehaul::model {

using nn::Activation;
using nn::LayerSpec;
using nn::Sequential;

void ModelConfig::validate() const {
  if (beams < 8) throw InvalidInput("model needs at least 8 beams");
  if (K < 1) throw InvalidInput("K must be >= 1");
  if (scan_hidden.empty() || meas_hidden.empty() || trunk_hidden.empty())
    throw InvalidInput("encoder and trunk need at least one layer");
  for (const auto* v : {&scan_hidden, &meas_hidden, &trunk_hidden})
    for (std::size_t w : *v)
      if (w == 0) throw InvalidInput("zero layer width");
  if (speed_hidden == 0 || branch_hidden == 0) throw InvalidInput("zero head width");
  if (lateral_branches < 1 || longitudinal_branches < 1) throw InvalidInput("need at least one branch per bank");
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"beams", c.beams},
          {"K", c.K},
          {"scan_hidden", c.scan_hidden},
          {"meas_hidden", c.meas_hidden},
          {"trunk_hidden", c.trunk_hidden},
          {"speed_hidden", c.speed_hidden},
          {"branch_hidden", c.branch_hidden},
          {"lateral_branches", c.lateral_branches},
          {"longitudinal_branches", c.longitudinal_branches},
          {"activation", nn::to_string(c.activation)}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.beams = j.at("beams").get<int>();
    c.K = j.at("K").get<int>();
    c.scan_hidden = j.at("scan_hidden").get<std::vector<std::size_t>>();
    c.meas_hidden = j.at("meas_hidden").get<std::vector<std::size_t>>();
    c.trunk_hidden = j.at("trunk_hidden").get<std::vector<std::size_t>>();
    c.speed_hidden = j.at("speed_hidden").get<std::size_t>();
    c.branch_hidden = j.at("branch_hidden").get<std::size_t>();
    c.lateral_branches = j.at("lateral_branches").get<int>();
    c.longitudinal_branches = j.at("longitudinal_branches").get<int>();
    c.activation = nn::activation_from_string(j.at("activation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

ControlCommand EvidentialPrediction::command(int k) const {
  ControlCommand u;
  for (std::size_t c = 0; c < kChannels; ++c) u[c] = channels[c][k].gamma;
  return u;
}

bool EvidentialPrediction::valid() const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (channels[c].size() != static_cast<std::size_t>(K)) return false;
    for (const NigParams& p : channels[c]) {
      if (!(p.gamma >= channel_min(c) && p.gamma <= channel_max(c))) return false;
      if (!(p.nu > 0.0 && p.alpha > 1.0 && p.beta > 0.0)) return false;
      double var = p.variance();
      if (!(std::isfinite(var) && var > 0.0)) return false;
    }
  }
  return true;
}

namespace {

Sequential mlp(const std::string& name, std::size_t in, const std::vector<std::size_t>& widths, Activation act,
               bool act_last, nn::ParamStore& store) {
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    layers.push_back(LayerSpec::dense(in, widths[i]));
    if (act_last || i + 1 < widths.size()) layers.push_back(LayerSpec::act(act, widths[i]));
    in = widths[i];
  }
  return Sequential(name, std::move(layers), store);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// p: 0 gamma, 1 nu, 2 alpha, 3 beta
double squash(double x, std::size_t p, bool steering) {
  switch (p) {
    case 0: return steering ? std::tanh(x) : sigmoid(x);
    case 2: return 1.0 + softplus(x) + kSquashFloor;
    default: return softplus(x) + kSquashFloor;
  }
}

double squash_grad(double x, double y, std::size_t p, bool steering) {
  if (p == 0) return steering ? 1.0 - y * y : y * (1.0 - y);
  return sigmoid(x);
}

Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(m.row(rows[i]), m.cols, out.row(i));
  return out;
}

}  // namespace

FusionPlanner::FusionPlanner(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const Activation a = config_.activation;
  const std::size_t K = config_.K;
  scan_enc_ = mlp("scan", 2 * config_.beams, config_.scan_hidden, a, true, store_);
  meas_enc_ = mlp("meas", 4, config_.meas_hidden, a, true, store_);
  trunk_ = mlp("trunk", config_.fusion_width(), config_.trunk_hidden, a, true, store_);
  const std::size_t tw = config_.trunk_hidden.back();
  speed_head_ = mlp("speed", tw, {config_.speed_hidden, 1}, a, false, store_);
  for (int b = 0; b < config_.lateral_branches; ++b)
    lat_branches_.push_back(
        mlp("lat" + std::to_string(b), tw, {config_.branch_hidden, kNig * K}, a, false, store_));
  for (int b = 0; b < config_.longitudinal_branches; ++b)
    lon_branches_.push_back(
        mlp("lon" + std::to_string(b), tw, {config_.branch_hidden, kLongChannels * kNig * K}, a, false, store_));

  std::mt19937_64 rng(seed);
  for (const Sequential* s : {&scan_enc_, &meas_enc_, &trunk_, &speed_head_}) s->init(store_, rng);
  for (const auto& s : lat_branches_) s.init(store_, rng);
  for (const auto& s : lon_branches_) s.init(store_, rng);
}

void FusionPlanner::scan_input(const world::RangeScan& scan, double* row) const {
  if (scan.beams != config_.beams || scan.ranges.size() != static_cast<std::size_t>(scan.beams) ||
      scan.valid.size() != scan.ranges.size())
    throw DimensionError("scan encoder: " + std::to_string(scan.beams) + " beams, model expects " +
                         std::to_string(config_.beams));
  const int n = config_.beams;
  for (int i = 0; i < n; ++i) {
    if (scan.valid[i]) {
      // snap onto the quantization grid so sub-resolution differences vanish
      double r = std::clamp(scan.ranges[i], world::kScanMinRange, world::kScanMaxRange);
      double cells = std::floor(r / world::kScanResolution + 1e-9);
      row[i] = cells * world::kScanResolution / world::kScanMaxRange;
      row[n + i] = 1.0;
    } else {
      row[i] = 1.0;
      row[n + i] = 0.0;
    }
  }
}

void FusionPlanner::measurement_input(const world::GnssFix& fix, double speed, double* row) {
  row[0] = fix.valid ? fix.position.x / kPositionScale : 0.0;
  row[1] = fix.valid ? fix.position.y / kPositionScale : 0.0;
  row[2] = fix.valid ? 1.0 : 0.0;
  row[3] = speed / kSpeedScale;
}

Batch FusionPlanner::make_batch(std::span<const Observation> obs) const {
  Batch b;
  b.scan.resize(obs.size(), 2 * config_.beams);
  b.meas.resize(obs.size(), 4);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    scan_input(obs[i].scan, b.scan.row(i));
    measurement_input(obs[i].gnss, obs[i].speed, b.meas.row(i));
    b.lateral.push_back(static_cast<int>(obs[i].hlc.lateral));
    b.longitudinal.push_back(static_cast<int>(obs[i].hlc.longitudinal));
  }
  return b;
}

std::vector<double> FusionPlanner::encode_scan(const world::RangeScan& scan) const {
  Matrix x(1, 2 * config_.beams);
  scan_input(scan, x.row(0));
  return scan_enc_.forward(store_, x).data;
}

std::vector<double> FusionPlanner::encode_measurement(const world::GnssFix& fix, double speed) const {
  Matrix x(1, 4);
  measurement_input(fix, speed, x.row(0));
  return meas_enc_.forward(store_, x).data;
}

void FusionPlanner::forward(const Batch& batch, ForwardState& st) const {
  const std::size_t n = batch.size();
  if (batch.meas.rows != n || batch.lateral.size() != n || batch.longitudinal.size() != n)
    throw DimensionError("batch: inconsistent sample counts");
  const Matrix& s = scan_enc_.forward(store_, batch.scan, st.scan_tape);
  const Matrix& m = meas_enc_.forward(store_, batch.meas, st.meas_tape);
  st.fused.resize(n, s.cols + m.cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(s.row(i), s.cols, st.fused.row(i));
    std::copy_n(m.row(i), m.cols, st.fused.row(i) + s.cols);
  }
  const Matrix& t = trunk_.forward(store_, st.fused, st.trunk_tape);
  st.speed = speed_head_.forward(store_, t, st.speed_tape);

  auto run_bank = [&](const std::vector<Sequential>& bank, const std::vector<int>& sel,
                      std::vector<nn::Sequential::Tape>& tapes, std::vector<std::vector<std::size_t>>& rows,
                      Matrix& raw) {
    tapes.assign(bank.size(), {});
    rows.assign(bank.size(), {});
    for (std::size_t i = 0; i < n; ++i) {
      if (sel[i] < 0 || sel[i] >= static_cast<int>(bank.size())) throw InvalidInput("branch index out of range");
      rows[sel[i]].push_back(i);
    }
    raw.resize(n, bank.front().output_width());
    for (std::size_t b = 0; b < bank.size(); ++b) {
      if (rows[b].empty()) continue;
      const Matrix& out = bank[b].forward(store_, gather(t, rows[b]), tapes[b]);
      for (std::size_t r = 0; r < rows[b].size(); ++r) std::copy_n(out.row(r), out.cols, raw.row(rows[b][r]));
    }
  };
  run_bank(lat_branches_, batch.lateral, st.lat_tapes, st.lat_rows, st.lat_raw);
  run_bank(lon_branches_, batch.longitudinal, st.lon_tapes, st.lon_rows, st.lon_raw);

  st.lat.resize(n, st.lat_raw.cols);
  st.lon.resize(n, st.lon_raw.cols);
  for (std::size_t j = 0; j < st.lat.data.size(); ++j) st.lat.data[j] = squash(st.lat_raw.data[j], j % kNig, true);
  for (std::size_t j = 0; j < st.lon.data.size(); ++j) st.lon.data[j] = squash(st.lon_raw.data[j], j % kNig, false);
}

void FusionPlanner::backward(const Batch& batch, ForwardState& st, const Matrix& d_lat, const Matrix& d_lon,
                             const Matrix& d_speed) {
  const std::size_t n = batch.size();
  if (d_lat.rows != n || d_lat.cols != st.lat.cols || d_lon.rows != n || d_lon.cols != st.lon.cols ||
      d_speed.rows != n || d_speed.cols != 1)
    throw DimensionError("backward: output gradient shape mismatch");
  const std::size_t tw = config_.trunk_hidden.back();
  Matrix dt(n, tw), part;

  auto bank_back = [&](std::vector<Sequential>& bank, std::vector<nn::Sequential::Tape>& tapes,
                       const std::vector<std::vector<std::size_t>>& rows, const Matrix& raw, const Matrix& sq,
                       const Matrix& d, bool steering) {
    for (std::size_t b = 0; b < bank.size(); ++b) {
      if (rows[b].empty()) continue;
      Matrix g(rows[b].size(), d.cols);
      for (std::size_t r = 0; r < rows[b].size(); ++r) {
        std::size_t i = rows[b][r];
        for (std::size_t j = 0; j < d.cols; ++j)
          g(r, j) = d(i, j) * squash_grad(raw(i, j), sq(i, j), j % kNig, steering);
      }
      bank[b].backward(store_, tapes[b], g, &part);
      for (std::size_t r = 0; r < rows[b].size(); ++r) {
        double* dst = dt.row(rows[b][r]);
        const double* src = part.row(r);
        for (std::size_t j = 0; j < tw; ++j) dst[j] += src[j];
      }
    }
  };
  bank_back(lat_branches_, st.lat_tapes, st.lat_rows, st.lat_raw, st.lat, d_lat, true);
  bank_back(lon_branches_, st.lon_tapes, st.lon_rows, st.lon_raw, st.lon, d_lon, false);

  speed_head_.backward(store_, st.speed_tape, d_speed, &part);
  for (std::size_t j = 0; j < dt.data.size(); ++j) dt.data[j] += part.data[j];

  Matrix dfused;
  trunk_.backward(store_, st.trunk_tape, dt, &dfused);
  const std::size_t sw = config_.scan_hidden.back(), mw = config_.meas_hidden.back();
  Matrix ds(n, sw), dm(n, mw);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(dfused.row(i), sw, ds.row(i));
    std::copy_n(dfused.row(i) + sw, mw, dm.row(i));
  }
  scan_enc_.backward(store_, st.scan_tape, ds, nullptr);
  meas_enc_.backward(store_, st.meas_tape, dm, nullptr);
}

EvidentialPrediction FusionPlanner::prediction_row(const ForwardState& st, std::size_t i) const {
  const int K = config_.K;
  EvidentialPrediction p;
  p.K = K;
  for (auto& ch : p.channels) ch.resize(K);
  auto read = [](const double* v) { return NigParams{v[0], v[1], v[2], v[3]}; };
  for (int k = 0; k < K; ++k) p.at(0, k) = read(st.lat.row(i) + k * kNig);
  for (std::size_t j = 0; j < kLongChannels; ++j)
    for (int k = 0; k < K; ++k) p.at(1 + j, k) = read(st.lon.row(i) + (j * K + k) * kNig);
  return p;
}

std::vector<ModelOutput> FusionPlanner::predict(std::span<const Observation> obs) const {
  Batch b = make_batch(obs);
  ForwardState st;
  forward(b, st);
  std::vector<ModelOutput> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out[i].prediction = prediction_row(st, i);
    out[i].speed = st.speed(i, 0) * kSpeedScale;
  }
  return out;
}

ModelOutput FusionPlanner::predict(const Observation& obs) const {
  return std::move(predict(std::span<const Observation>(&obs, 1)).front());
}

void FusionPlanner::save(const std::string& path, nlohmann::json meta) const {
  meta["model_config"] = config_to_json(config_);
  nn::save_checkpoint(path, store_, meta);
}

nlohmann::json FusionPlanner::load(const std::string& path) {
  nlohmann::json meta = nn::read_checkpoint_meta(path);
  if (!meta.contains("model_config")) throw ParseError("checkpoint without model config: " + path);
  if (config_from_json(meta["model_config"]) != config_)
    throw DimensionError("checkpoint model config does not match: " + meta["model_config"].dump());
  return nn::load_checkpoint(path, store_);
}

FusionPlanner FusionPlanner::from_checkpoint(const std::string& path) {
  nlohmann::json meta = nn::read_checkpoint_meta(path);
  if (!meta.contains("model_config")) throw ParseError("checkpoint without model config: " + path);
  FusionPlanner m(config_from_json(meta["model_config"]));
  m.load(path);
  return m;
}

}  // namespace minehaul::model
