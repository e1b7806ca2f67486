#include "minehaul/objectives/losses.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "minehaul/errors.hpp"
#include "minehaul/nn/special.hpp"

namespace minehaul::objectives {

using model::kLongChannels;
using model::kNig;

const char* to_string(RegularizerForm f) { return f == RegularizerForm::Paper ? "paper" : "standard"; }

RegularizerForm regularizer_from_string(const std::string& s) {
  if (s == "paper") return RegularizerForm::Paper;
  if (s == "standard") return RegularizerForm::Standard;
  throw ParseError("unknown regularizer form '" + s + "'");
}

double evidential_nll(double y, const NigParams& p, NigGrad* grad) {
  if (!(p.nu > 0.0 && p.alpha > 1.0 && p.beta > 0.0))
    throw DomainError("NIG parameters out of domain: nu=" + std::to_string(p.nu) + " alpha=" + std::to_string(p.alpha) +
                      " beta=" + std::to_string(p.beta));
  const double r = y - p.gamma;
  const double omega = 2.0 * p.beta * (1.0 + p.nu);
  const double q = r * r * p.nu + omega;
  const double value = 0.5 * std::log(std::numbers::pi / p.nu) - p.alpha * std::log(omega) +
                       (p.alpha + 0.5) * std::log(q) + nn::log_gamma(p.alpha) - nn::log_gamma(p.alpha + 0.5);
  if (grad) {
    const double a5 = p.alpha + 0.5;
    grad->gamma = -a5 * 2.0 * r * p.nu / q;
    grad->nu = -0.5 / p.nu - p.alpha * 2.0 * p.beta / omega + a5 * (r * r + 2.0 * p.beta) / q;
    grad->alpha = -std::log(omega) + std::log(q) + nn::digamma(p.alpha) - nn::digamma(a5);
    grad->beta = -p.alpha / p.beta + a5 * 2.0 * (1.0 + p.nu) / q;
  }
  return value;
}

double evidence_regularizer(double y, const NigParams& p, RegularizerForm form, NigGrad* grad) {
  const double r = y - p.gamma;
  const double ar = std::abs(r);
  const double ca = form == RegularizerForm::Paper ? 2.0 : 1.0;
  const double cn = form == RegularizerForm::Paper ? 1.0 : 2.0;
  if (grad) {
    double sgn = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    grad->gamma = -sgn * (ca * p.alpha + cn * p.nu);
    grad->nu = cn * ar;
    grad->alpha = ca * ar;
    grad->beta = 0.0;
  }
  return ar * (ca * p.alpha + cn * p.nu);
}

double boost_factor(double y, double sigma) { return 1.0 + std::exp(-y * y / (2.0 * sigma * sigma)); }

double task_weighting(std::span<const double> losses, std::span<const double> s, std::span<double> d_losses,
                      std::span<double> d_s) {
  if (losses.size() != s.size() || losses.empty()) throw DimensionError("task_weighting: size mismatch");
  const double T = static_cast<double>(losses.size());
  double total = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    double w = std::exp(-s[t]) / T;
    total += w * losses[t] + 0.5 * s[t];
    if (!d_losses.empty()) d_losses[t] = w;
    if (!d_s.empty()) d_s[t] = -w * losses[t] + 0.5;
  }
  return total;
}

double LossBreakdown::mae_sum() const { return mae[0] + mae[1] + mae[2] + mae[3]; }
double LossBreakdown::nll_sum() const { return nll[0] + nll[1] + nll[2] + nll[3]; }
double LossBreakdown::reg_sum() const { return reg[0] + reg[1] + reg[2] + reg[3]; }

namespace {

void require_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw DivergenceError(std::string("non-finite ") + term + " term in loss");
}

}  // namespace

LossBreakdown multitask_loss(const Matrix& lat, const Matrix& lon, const Matrix& speed, int K, const Targets& tg,
                             std::span<const double> s, const LossConfig& cfg, LossGrad* grad) {
  const std::size_t n = lat.rows;
  const std::size_t Ku = static_cast<std::size_t>(K);
  if (n == 0) throw InvalidInput("multitask_loss: empty batch");
  if (lat.cols != kNig * Ku || lon.rows != n || lon.cols != kLongChannels * kNig * Ku || speed.rows != n ||
      speed.cols != 1 || tg.y.rows != n || tg.y.cols != kChannels * Ku || tg.speed.size() != n || s.size() != kChannels)
    throw DimensionError("multitask_loss: shape mismatch");

  // location of (gamma, nu, alpha, beta) for sample i, channel c, lookahead k
  auto slot = [&](std::size_t i, std::size_t c, std::size_t k) -> std::pair<const double*, std::size_t> {
    if (c == 0) return {lat.row(i) + k * kNig, k * kNig};
    std::size_t off = ((c - 1) * Ku + k) * kNig;
    return {lon.row(i) + off, off};
  };

  LossBreakdown out;
  const double inv_n = 1.0 / static_cast<double>(n);
  // per-element gradients before task weights, accumulated into grad matrices
  if (grad) {
    grad->d_lat.resize(n, lat.cols);
    grad->d_lon.resize(n, lon.cols);
    grad->d_speed.resize(n, 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (std::size_t k = 0; k < Ku; ++k) {
        auto [v, off] = slot(i, c, k);
        NigParams p{v[0], v[1], v[2], v[3]};
        const double y = tg.y(i, c * Ku + k);
        const double b = cfg.boost ? boost_factor(y, cfg.boost_sigma) : 1.0;
        const double r = p.gamma - y;
        double mae = cfg.mae_scale * std::abs(r);
        NigGrad gn, gr;
        double nll = 0.0, reg = 0.0;
        if (cfg.evidential) {
          nll = evidential_nll(y, p, grad ? &gn : nullptr);
          reg = evidence_regularizer(y, p, cfg.regularizer, grad ? &gr : nullptr);
        }
        out.mae[c] += b * mae * inv_n;
        out.nll[c] += b * nll * inv_n;
        out.reg[c] += b * reg * inv_n;
        if (grad) {
          double* d = (c == 0 ? grad->d_lat.row(i) : grad->d_lon.row(i)) + off;
          double sg = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
          // scaled by the task weight below
          d[0] = b * inv_n * (cfg.mae_scale * sg + gn.gamma + gr.gamma);
          d[1] = b * inv_n * (gn.nu + gr.nu);
          d[2] = b * inv_n * (gn.alpha + gr.alpha);
          d[3] = b * inv_n * (gn.beta + gr.beta);
        }
      }
    }
    const double e = speed(i, 0) - tg.speed[i];
    out.speed += std::abs(e) * inv_n;
    if (grad) grad->d_speed(i, 0) = cfg.speed_weight * inv_n * (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0));
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    require_finite(out.mae[c], "mae");
    require_finite(out.nll[c], "nll");
    require_finite(out.reg[c], "regularizer");
  }
  require_finite(out.speed, "speed");

  std::array<double, kChannels> task{}, d_task{};
  for (std::size_t c = 0; c < kChannels; ++c) task[c] = out.mae[c] + out.nll[c] + out.reg[c];
  std::array<double, kChannels> d_s{};
  const double weighted_plus_log = task_weighting(task, s, d_task, grad ? std::span<double>(d_s) : std::span<double>());
  out.log_sigma_term = 0.0;
  for (double v : s) out.log_sigma_term += 0.5 * v;
  out.weighted = weighted_plus_log - out.log_sigma_term;
  out.total = out.weighted + out.log_sigma_term + cfg.speed_weight * out.speed;
  require_finite(out.total, "total");

  if (grad) {
    grad->d_s = d_s;
    for (std::size_t i = 0; i < n; ++i) {
      double* dl = grad->d_lat.row(i);
      for (std::size_t j = 0; j < lat.cols; ++j) dl[j] *= d_task[0];
      double* dn = grad->d_lon.row(i);
      for (std::size_t j = 0; j < lon.cols; ++j) dn[j] *= d_task[1 + j / (Ku * kNig)];
    }
  }
  return out;
}

}  // namespace minehaul::objectives
