#pragma once

#include <string>

#include "minehaul/nn/params.hpp"
#include <json.hpp>

namespace minehaul::nn {

// Binary layout: "MHCK", u32 version, u64 header length, JSON header
// {"meta": ..., "step": n, "params": [{"name", "shape"}...]}, then per
// parameter value, m, v as little-endian float64.
inline constexpr unsigned kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParamStore& store, const nlohmann::json& meta);

/// Restores values, moments and step into a store with identical names and
/// shapes. Returns the stored metadata. IoError / ParseError / DimensionError.
nlohmann::json load_checkpoint(const std::string& path, ParamStore& store);

/// Header only (metadata, no tensors).
nlohmann::json read_checkpoint_meta(const std::string& path);

}  // namespace minehaul::nn
