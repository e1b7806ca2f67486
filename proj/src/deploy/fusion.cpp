#include "minehaul/deploy/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"

namespace minehaul::deploy {

const char* to_string(FusionMode m) {
  switch (m) {
    case FusionMode::Instantaneous: return "instantaneous";
    case FusionMode::Uniform: return "uniform";
    case FusionMode::Evidential: return "evidential";
  }
  return "?";
}

FusionMode fusion_mode_from_string(const std::string& s) {
  for (FusionMode m : {FusionMode::Instantaneous, FusionMode::Uniform, FusionMode::Evidential})
    if (s == to_string(m)) return m;
  throw ParseError("unknown fusion mode '" + s + "'");
}

FusionBuffer::FusionBuffer(int K, double spacing) : K_(K), spacing_(spacing) {
  if (K < 1) throw InvalidInput("fusion buffer needs K >= 1");
  if (!(spacing > 0.0)) throw InvalidInput("fusion spacing must be positive");
}

void FusionBuffer::ingest(double s, const model::EvidentialPrediction& pred) {
  if (pred.K < K_) throw DimensionError("prediction has K = " + std::to_string(pred.K));
  std::vector<BinEntry> entries(K_);
  for (int k = 0; k < K_; ++k) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      const model::NigParams& p = pred.at(c, k);
      if (!(p.alpha > 1.0)) throw DomainError("alpha <= 1: variance undefined");
      double var = p.variance();
      if (!(std::isfinite(var) && var > 0.0)) throw DomainError("variance not finite and positive");
      entries[k].value[c] = p.gamma;
      entries[k].confidence[c] = 1.0 / var;
    }
  }
  for (int k = 0; k < K_; ++k) bins_[bin_index(s + k * spacing_)].push_back(entries[k]);
}

void FusionBuffer::evict_before(long d) { bins_.erase(bins_.begin(), bins_.lower_bound(d)); }

const std::vector<BinEntry>* FusionBuffer::bin(long d) const {
  ++reads_;
  auto it = bins_.find(d);
  return it == bins_.end() || it->second.empty() ? nullptr : &it->second;
}

std::size_t FusionBuffer::entry_count() const {
  std::size_t n = 0;
  for (const auto& [d, v] : bins_) n += v.size();
  return n;
}

ControlCommand fuse_entries(const std::vector<BinEntry>& entries, FusionMode mode) {
  ControlCommand out;
  if (entries.empty()) throw InvalidInput("fuse_entries: empty bin");
  for (std::size_t c = 0; c < kChannels; ++c) {
    double lo = entries[0].value[c], hi = lo;
    for (const BinEntry& e : entries) {
      lo = std::min(lo, e.value[c]);
      hi = std::max(hi, e.value[c]);
    }
    double v;
    if (mode == FusionMode::Evidential) {
      // weights normalized by their maximum first so huge confidences cannot overflow
      double top = 0.0;
      for (const BinEntry& e : entries) top = std::max(top, e.confidence[c]);
      double num = 0.0, den = 0.0;
      for (const BinEntry& e : entries) {
        double w = e.confidence[c] / top;
        num += w * e.value[c];
        den += w;
      }
      v = num / den;
    } else {
      double sum = 0.0;
      for (const BinEntry& e : entries) sum += e.value[c];
      v = sum / static_cast<double>(entries.size());
    }
    out[c] = std::clamp(v, lo, hi);  // rounding can step one ulp outside the hull
  }
  return out;
}

ControlCommand fuse(const FusionBuffer& buffer, long d, FusionMode mode, const model::EvidentialPrediction& latest) {
  if (mode != FusionMode::Instantaneous)
    if (const auto* entries = buffer.bin(d)) return fuse_entries(*entries, mode).clamped();
  return latest.command(0).clamped();
}

}  // namespace minehaul::deploy
