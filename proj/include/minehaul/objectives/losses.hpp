#pragma once

#include <array>
#include <span>

#include "minehaul/command.hpp"
#include "minehaul/model/fusion_planner.hpp"

namespace minehaul::objectives {

using model::Matrix;
using model::NigParams;

enum class RegularizerForm {
  Paper,     // |y - gamma| (2 alpha + nu)
  Standard,  // |y - gamma| (2 nu + alpha)
};

const char* to_string(RegularizerForm f);
RegularizerForm regularizer_from_string(const std::string& s);

/// Partial derivatives w.r.t. (gamma, nu, alpha, beta).
struct NigGrad {
  double gamma = 0.0, nu = 0.0, alpha = 0.0, beta = 0.0;
};

/// Negative log marginal likelihood of y under NIG(gamma, nu, alpha, beta).
/// DomainError unless nu > 0, alpha > 1, beta > 0.
double evidential_nll(double y, const NigParams& p, NigGrad* grad = nullptr);
double evidence_regularizer(double y, const NigParams& p, RegularizerForm form = RegularizerForm::Paper,
                            NigGrad* grad = nullptr);
/// 1 + exp(-y^2 / (2 sigma^2)).
double boost_factor(double y, double sigma = 1.0 / 15.0);

/// Uncertainty weighting over T tasks: sum_t exp(-s_t)/T * L_t + 1/2 sum_t s_t,
/// s_t = log sigma_t^2. The second term is log(prod sigma_t). Writes dL/dL_t
/// and dL/ds_t when the spans are non-empty.
double task_weighting(std::span<const double> task_losses, std::span<const double> s, std::span<double> d_losses = {},
                      std::span<double> d_s = {});

struct LossConfig {
  double mae_scale = 1500.0;
  double boost_sigma = 1.0 / 15.0;
  bool boost = true;
  bool evidential = true;  // NLL and regularizer terms
  RegularizerForm regularizer = RegularizerForm::Paper;
  double speed_weight = 0.1;
};

/// Batch means. mae/nll/reg are boosted sums over the horizon per task
/// (before the uncertainty weights); weighted = sum_t exp(-s_t)/4 (mae+nll+reg)_t;
/// total = weighted + log_sigma_term + speed_weight * speed.
struct LossBreakdown {
  std::array<double, kChannels> mae{};
  std::array<double, kChannels> nll{};
  std::array<double, kChannels> reg{};
  double weighted = 0.0;
  double log_sigma_term = 0.0;
  double speed = 0.0;  // mean |v_hat - v| in normalized speed units
  double total = 0.0;

  double mae_sum() const;
  double nll_sum() const;
  double reg_sum() const;
};

/// Supervision for a batch: y is n x 4K with entry (c*K + k); speed is normalized.
struct Targets {
  Matrix y;
  std::vector<double> speed;
};

struct LossGrad {
  Matrix d_lat, d_lon, d_speed;
  std::array<double, kChannels> d_s{};
};

/// Full objective over the model head outputs (layouts as in ForwardState).
/// DivergenceError naming the term if anything is non-finite.
LossBreakdown multitask_loss(const Matrix& lat, const Matrix& lon, const Matrix& speed, int K, const Targets& targets,
                             std::span<const double> s, const LossConfig& cfg, LossGrad* grad = nullptr);

}  // namespace minehaul::objectives
