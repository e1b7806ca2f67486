#include "minehaul/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "minehaul/errors.hpp"

namespace minehaul::nn {

GradCheckResult gradient_check(ParamStore& store, const std::function<double()>& loss, std::mt19937_64& rng,
                               std::size_t probes, double h, double floor, bool skip_kinks) {
  const std::size_t total = store.total_size();
  if (total == 0) throw InvalidInput("gradient_check: empty store");
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  GradCheckResult res;
  for (std::size_t attempt = 0; res.probes < probes && attempt < 20 * probes; ++attempt) {
    std::size_t flat = pick(rng), i = 0;
    while (flat >= store[i].size()) flat -= store[i++].size();
    Param& p = store[i];
    const double x0 = p.value[flat];
    p.value[flat] = x0 + h;
    double up = loss();
    p.value[flat] = x0 - h;
    double down = loss();
    p.value[flat] = x0;
    if (skip_kinks) {
      // one-sided slopes that disagree by more than smooth curvature allows mean
      // a kink (relu, |r|) inside [x - h, x + h]; the derivative is undefined there
      double mid = loss();
      double fwd = up - mid, bwd = mid - down;
      if (std::abs(fwd - bwd) > 1e-4 * std::max(std::abs(fwd), std::abs(bwd)) + 1e-13) {
        ++res.skipped;
        continue;
      }
    }
    double numeric = (up - down) / (2.0 * h);
    double analytic = p.grad[flat];
    double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
    if (!(err <= res.max_rel_error)) {
      res.max_rel_error = err;
      res.worst = p.name + "[" + std::to_string(flat) + "]";
    }
    ++res.probes;
  }
  return res;
}

}  // namespace minehaul::nn
