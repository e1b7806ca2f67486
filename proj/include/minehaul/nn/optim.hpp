#pragma once

#include <cstddef>

#include "minehaul/nn/params.hpp"

namespace minehaul::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected ADAM update of every parameter, then zeroes the gradients.
/// Throws DivergenceError (store untouched) if any gradient is non-finite.
void adam_step(ParamStore& store, double lr, const AdamConfig& cfg = {});

/// lr0 * 0.5 * (1 + cos(pi * step / total)); step is clamped to [0, total].
double cosine_lr(std::size_t step, std::size_t total, double lr0 = 2e-4);

}  // namespace minehaul::nn
