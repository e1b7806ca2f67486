#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "minehaul/command.hpp"
#include "minehaul/model/fusion_planner.hpp"

namespace minehaul::deploy {

enum class FusionMode { Instantaneous, Uniform, Evidential };

const char* to_string(FusionMode m);
FusionMode fusion_mode_from_string(const std::string& s);

/// One stored prediction: per-channel command and confidence 1/Var.
struct BinEntry {
  std::array<double, kChannels> value{};
  std::array<double, kChannels> confidence{};
};

/// Distance-binned prediction store. The k-th lookahead of a prediction made
/// at odometer s lands in bin round(s + k * spacing); the truck at odometer s
/// reads bin round(s).
class FusionBuffer {
 public:
  explicit FusionBuffer(int K = 5, double spacing = 1.0);

  static long bin_index(double s) { return std::lround(s); }

  /// DomainError when any alpha <= 1 or a variance is not finite and positive.
  void ingest(double s, const model::EvidentialPrediction& pred);
  /// Drops bins with index < d.
  void evict_before(long d);
  void clear() { bins_.clear(); }

  /// nullptr when the bin is empty. Counts as a read.
  const std::vector<BinEntry>* bin(long d) const;
  std::size_t bin_count() const { return bins_.size(); }
  std::size_t entry_count() const;
  std::size_t reads() const { return reads_; }
  int K() const { return K_; }

 private:
  int K_;
  double spacing_;
  std::map<long, std::vector<BinEntry>> bins_;
  mutable std::size_t reads_ = 0;
};

/// Fusion over a list of entries for one channel set.
ControlCommand fuse_entries(const std::vector<BinEntry>& entries, FusionMode mode);

/// Instantaneous returns latest a_0 without touching the buffer; uniform and
/// evidential average bin d (falling back to a_0 when it is empty). Clamped to
/// channel ranges.
ControlCommand fuse(const FusionBuffer& buffer, long d, FusionMode mode, const model::EvidentialPrediction& latest);

}  // namespace minehaul::deploy
