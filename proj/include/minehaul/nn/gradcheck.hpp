#pragma once

#include <functional>
#include <random>
#include <string>

#include "minehaul/nn/params.hpp"

namespace minehaul::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[<index>]"
  std::size_t probes = 0;
  std::size_t skipped = 0;  // kink probes, only with skip_kinks
};

/// Compares the gradients already stored in `store` against central
/// differences of `loss` at randomly chosen coordinates. Relative error is
/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero entries from
/// dominating. With `skip_kinks`, coordinates whose one-sided differences
/// disagree (a non-differentiable point within h) are redrawn.
GradCheckResult gradient_check(ParamStore& store, const std::function<double()>& loss, std::mt19937_64& rng,
                               std::size_t probes = 64, double h = 1e-5, double floor = 1e-6,
                               bool skip_kinks = false);

}  // namespace minehaul::nn
