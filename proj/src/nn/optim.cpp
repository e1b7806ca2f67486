#include "minehaul/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minehaul/errors.hpp"

namespace minehaul::nn {

void adam_step(ParamStore& store, double lr, const AdamConfig& cfg) {
  for (std::size_t i = 0; i < store.size(); ++i)
    for (double g : store[i].grad)
      if (!std::isfinite(g)) throw DivergenceError("non-finite gradient in " + store[i].name);
  store.step += 1;
  const double t = static_cast<double>(store.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < store.size(); ++i) {
    Param& p = store[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      double g = p.grad[j];
      p.m[j] = cfg.beta1 * p.m[j] + (1.0 - cfg.beta1) * g;
      p.v[j] = cfg.beta2 * p.v[j] + (1.0 - cfg.beta2) * g * g;
      if (lr != 0.0) p.value[j] -= lr * (p.m[j] / c1) / (std::sqrt(p.v[j] / c2) + cfg.eps);
      p.grad[j] = 0.0;
    }
  }
}

double cosine_lr(std::size_t step, std::size_t total, double lr0) {
  if (total == 0) return lr0;
  double x = static_cast<double>(std::min(step, total)) / static_cast<double>(total);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
}

}  // namespace minehaul::nn
