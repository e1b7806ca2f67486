#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "minehaul/command.hpp"
#include "minehaul/nn/layers.hpp"
#include "minehaul/observation.hpp"

namespace minehaul::model {

using nn::Matrix;

inline constexpr double kSpeedScale = 20.0 / 3.6;  // measurement and speed-head normalization, m/s
inline constexpr double kPositionScale = 1000.0;   // m
inline constexpr double kSquashFloor = 1e-6;
inline constexpr std::size_t kNig = 4;              // gamma, nu, alpha, beta
inline constexpr std::size_t kLongChannels = 3;

struct ModelConfig {
  int beams = 108;
  int K = 5;
  std::vector<std::size_t> scan_hidden{256, 256};
  std::vector<std::size_t> meas_hidden{512, 512, 256};
  std::vector<std::size_t> trunk_hidden{256, 256};
  std::size_t speed_hidden = 64;
  std::size_t branch_hidden = 128;
  int lateral_branches = 3;
  int longitudinal_branches = 3;
  nn::Activation activation = nn::Activation::Relu;

  /// Throws InvalidInput for non-positive sizes or a K below 1.
  void validate() const;
  std::size_t fusion_width() const { return scan_hidden.back() + meas_hidden.back(); }
  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

struct NigParams {
  double gamma = 0.0;
  double nu = 1.0;
  double alpha = 2.0;
  double beta = 1.0;

  /// Epistemic variance beta / (nu (alpha - 1)).
  double variance() const { return beta / (nu * (alpha - 1.0)); }
};

/// Per channel (str, acc, dec_e, dec_m) and lookahead k.
struct EvidentialPrediction {
  int K = 0;
  std::array<std::vector<NigParams>, kChannels> channels;

  const NigParams& at(std::size_t c, int k) const { return channels[c][k]; }
  NigParams& at(std::size_t c, int k) { return channels[c][k]; }
  ControlCommand command(int k) const;
  /// True when every entry satisfies the range and positivity invariants.
  bool valid() const;
};

struct ModelOutput {
  EvidentialPrediction prediction;
  double speed = 0.0;  // m/s
};

/// Network inputs for a batch plus the branch selected by each sample's HLC.
struct Batch {
  Matrix scan;  // n x 2*beams
  Matrix meas;  // n x 4
  std::vector<int> lateral;
  std::vector<int> longitudinal;
  std::size_t size() const { return scan.rows; }
};

/// Activations kept for backward. `lat` is n x 4K with entry (k*4 + p),
/// `lon` is n x 12K with entry ((j*K + k)*4 + p), p indexing (gamma, nu,
/// alpha, beta); both hold squashed values. `speed` is normalized.
struct ForwardState {
  nn::Sequential::Tape scan_tape, meas_tape, trunk_tape, speed_tape;
  std::vector<nn::Sequential::Tape> lat_tapes, lon_tapes;
  std::vector<std::vector<std::size_t>> lat_rows, lon_rows;
  Matrix fused;
  Matrix lat_raw, lon_raw, lat, lon, speed;
};

class FusionPlanner {
 public:
  explicit FusionPlanner(ModelConfig config = {}, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  /// Writes the 2*beams scan input: ranges/120 (1.0 where invalid) then the valid mask.
  void scan_input(const world::RangeScan& scan, double* row) const;
  /// [x/1000, y/1000, valid, speed/kSpeedScale]; position is exactly 0 when the fix is invalid.
  static void measurement_input(const world::GnssFix& fix, double speed, double* row);
  Batch make_batch(std::span<const Observation> obs) const;

  std::vector<double> encode_scan(const world::RangeScan& scan) const;
  std::vector<double> encode_measurement(const world::GnssFix& fix, double speed) const;

  void forward(const Batch& batch, ForwardState& state) const;
  /// Accumulates parameter gradients from gradients w.r.t. the squashed
  /// outputs (same layout as state.lat / state.lon) and the normalized speed.
  void backward(const Batch& batch, ForwardState& state, const Matrix& d_lat, const Matrix& d_lon,
                const Matrix& d_speed);

  ModelOutput predict(const Observation& obs) const;
  std::vector<ModelOutput> predict(std::span<const Observation> obs) const;
  EvidentialPrediction prediction_row(const ForwardState& state, std::size_t i) const;

  void save(const std::string& path, nlohmann::json meta = nlohmann::json::object()) const;
  /// Validates the embedded config against this model; DimensionError on mismatch.
  nlohmann::json load(const std::string& path);
  /// Builds a model with the config stored in the checkpoint.
  static FusionPlanner from_checkpoint(const std::string& path);

 private:
  ModelConfig config_;
  nn::ParamStore store_;
  nn::Sequential scan_enc_, meas_enc_, trunk_, speed_head_;
  std::vector<nn::Sequential> lat_branches_, lon_branches_;
};

}  // namespace minehaul::model
