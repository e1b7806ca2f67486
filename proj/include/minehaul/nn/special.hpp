#pragma once

namespace minehaul::nn {

/// ln Gamma(x) for x > 0; DomainError otherwise.
double log_gamma(double x);
/// d/dx ln Gamma(x) for x > 0; DomainError otherwise.
double digamma(double x);

}  // namespace minehaul::nn
