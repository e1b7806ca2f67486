#include "minehaul/nn/special.hpp"

#include <cmath>
#include <string>

#include "minehaul/errors.hpp"

namespace minehaul::nn {

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: x = " + std::to_string(x));
  return std::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma: x = " + std::to_string(x));
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // asymptotic series in 1/x^2
  double r = 1.0 / (x * x);
  double series = r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132)))));
  return acc + std::log(x) - 0.5 / x - series;
}

}  // namespace minehaul::nn
