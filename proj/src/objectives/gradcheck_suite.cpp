#include "minehaul/objectives/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "minehaul/nn/gradcheck.hpp"
#include "minehaul/nn/layers.hpp"
#include "minehaul/objectives/losses.hpp"

namespace minehaul::objectives {

namespace {

double rel(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

NigParams random_nig(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {2.0 * u(rng) - 1.0, 0.05 + 5.0 * u(rng), 1.01 + 6.0 * u(rng), 0.01 + 3.0 * u(rng)};
}

// Five-point stencil: truncation O(h^4), so h can stay large enough that
// round-off on loss totals in the thousands does not swamp small gradients.
double central(double& x, const std::function<double()>& f) {
  const double x0 = x;
  // step shrinks with small positive parameters (nu, beta near their floors)
  const double kH = 5e-3 * std::clamp(std::abs(x0), 0.01, 1.0);
  auto at = [&](double d) {
    x = x0 + d;
    return f();
  };
  double d = (-at(2 * kH) + 8 * at(kH) - 8 * at(-kH) + at(-2 * kH)) / (12.0 * kH);
  x = x0;
  return d;
}

struct Tally {
  double worst = 0.0;
  std::size_t probes = 0;
  std::string where;
  void add(double analytic, double numeric, const std::string& at = {}) {
    double r = rel(analytic, numeric);
    if (r > worst) worst = r, where = at;
    ++probes;
  }
};

GradCheckCase finish(std::string name, const Tally& t, double tol) {
  bool ok = t.worst < tol && std::isfinite(t.worst);
  if (!ok && !t.where.empty()) name += " worst " + t.where;
  return {std::move(name), t.worst, t.probes, ok};
}

GradCheckCase nig_term(const char* name, std::mt19937_64& rng, std::size_t probes, double tol,
                       const std::function<double(double, const NigParams&, NigGrad*)>& term) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tally t;
  double NigParams::*fields[] = {&NigParams::gamma, &NigParams::nu, &NigParams::alpha, &NigParams::beta};
  while (t.probes < probes) {
    NigParams p = random_nig(rng);
    double y = u(rng);
    if (std::abs(y - p.gamma) < 0.05) continue;  // |y - gamma| kink inside the stencil
    NigGrad g;
    term(y, p, &g);
    double an[] = {g.gamma, g.nu, g.alpha, g.beta};
    for (int f = 0; f < 4; ++f) t.add(an[f], central(p.*fields[f], [&] { return term(y, p, nullptr); }));
  }
  return finish(name, t, tol);
}

struct Heads {
  Matrix lat, lon, speed;
  Targets tg;
};

Heads random_heads(std::size_t n, int K, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Heads h{Matrix(n, 4 * K), Matrix(n, 12 * K), Matrix(n, 1), {}};
  auto fill = [&](Matrix& m, bool steering) {
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; j += 4) {
        NigParams p = random_nig(rng);
        m(i, j) = steering ? p.gamma : u(rng);
        m(i, j + 1) = p.nu;
        m(i, j + 2) = p.alpha;
        m(i, j + 3) = p.beta;
      }
  };
  fill(h.lat, true);
  fill(h.lon, false);
  for (double& v : h.speed.data) v = u(rng);
  h.tg.y.resize(n, 4 * K);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      h.tg.y(i, k) = 2 * u(rng) - 1;
      for (int c = 1; c < 4; ++c) h.tg.y(i, c * K + k) = u(rng) < 0.3 ? 0.0 : u(rng);
    }
    h.tg.speed.push_back(u(rng));
  }
  // keep every |gamma - y| and |v_hat - v| clear of the stencil so no probe straddles a kink
  auto clear = [](double& g, double y) {
    if (std::abs(g - y) < 0.05) g = y + (g >= y ? 0.05 : -0.05);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      clear(h.lat(i, 4 * k), h.tg.y(i, k));
      for (int j = 0; j < 3; ++j) clear(h.lon(i, 4 * (j * K + k)), h.tg.y(i, (1 + j) * K + k));
    }
    clear(h.speed(i, 0), h.tg.speed[i]);
  }
  return h;
}

enum class Probe { Gamma, All, Speed, LogVariance };

GradCheckCase loss_case(const char* name, std::mt19937_64& rng, std::size_t probes, double tol, LossConfig cfg,
                        Probe what) {
  const int K = 3;
  Heads h = random_heads(6, K, rng);
  std::array<double, 4> s{0.2, -0.4, 1.1, 0.0};
  LossGrad g;
  multitask_loss(h.lat, h.lon, h.speed, K, h.tg, s, cfg, &g);
  auto total = [&] { return multitask_loss(h.lat, h.lon, h.speed, K, h.tg, s, cfg).total; };
  Tally t;
  std::uniform_int_distribution<std::size_t> pick_lat(0, h.lat.data.size() - 1), pick_lon(0, h.lon.data.size() - 1);
  std::size_t guard = 0;
  while (t.probes < probes && guard++ < 100 * probes) {
    switch (what) {
      case Probe::Gamma:
      case Probe::All: {
        std::size_t a = pick_lat(rng), b = pick_lon(rng);
        if (what == Probe::All || a % 4 == 0)
          t.add(g.d_lat.data[a], central(h.lat.data[a], total), "lat[" + std::to_string(a) + "]=" + std::to_string(h.lat.data[a]));
        if (what == Probe::All || b % 4 == 0)
          t.add(g.d_lon.data[b], central(h.lon.data[b], total), "lon[" + std::to_string(b) + "]=" + std::to_string(h.lon.data[b]));
        break;
      }
      case Probe::Speed: {
        std::size_t i = t.probes % h.speed.rows;
        t.add(g.d_speed(i, 0), central(h.speed(i, 0), total));
        break;
      }
      case Probe::LogVariance: {
        std::size_t c = t.probes % kChannels;
        t.add(g.d_s[c], central(s[c], total));
        break;
      }
    }
  }
  return finish(name, t, tol);
}

GradCheckCase layer_case(nn::Activation act, std::mt19937_64& rng, std::size_t probes, double tol) {
  nn::ParamStore store;
  nn::Sequential net("g", {nn::LayerSpec::dense(6, 9), nn::LayerSpec::act(act, 9), nn::LayerSpec::dense(9, 3)}, store);
  net.init(store, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Matrix x(4, 6), target(4, 3);
  for (double& v : x.data) v = u(rng);
  for (double& v : target.data) v = u(rng);
  auto loss = [&] {
    nn::Matrix y = net.forward(store, x);
    double l = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) l += 0.5 * (y.data[i] - target.data[i]) * (y.data[i] - target.data[i]);
    return l;
  };
  nn::Sequential::Tape tape;
  const nn::Matrix& y = net.forward(store, x, tape);
  nn::Matrix dy(y.rows, y.cols);
  for (std::size_t i = 0; i < y.data.size(); ++i) dy.data[i] = y.data[i] - target.data[i];
  store.zero_grad();
  nn::Matrix dx;
  net.backward(store, tape, dy, &dx);
  nn::GradCheckResult r = nn::gradient_check(store, loss, rng, probes);
  Tally t{r.max_rel_error, r.probes, r.worst};
  for (std::size_t j = 0; j < x.data.size(); ++j) {
    const double x0 = x.data[j], h = 1e-5;
    x.data[j] = x0 + h;
    double up = loss();
    x.data[j] = x0 - h;
    double down = loss();
    x.data[j] = x0;
    t.add(dx.data[j], (up - down) / (2 * h));
  }
  return finish(std::string("layer[dense+") + nn::to_string(act) + "]", t, tol);
}

GradCheckCase planner_case(nn::Activation act, std::mt19937_64& rng, std::size_t probes, double tol) {
  model::ModelConfig cfg;
  cfg.beams = 12;
  cfg.K = 3;
  cfg.scan_hidden = {10, 9};
  cfg.meas_hidden = {11, 10, 8};
  cfg.trunk_hidden = {12, 9};
  cfg.speed_hidden = 6;
  cfg.branch_hidden = 7;
  cfg.activation = act;
  model::FusionPlanner m(cfg, rng());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> obs;
  const std::size_t n = 9;
  objectives::Targets tg;
  tg.y.resize(n, 4 * cfg.K);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.scan.beams = cfg.beams;
    o.scan.fov = 1.5 * world::kPi;
    for (int b = 0; b < cfg.beams; ++b) {
      bool valid = u(rng) < 0.8;
      o.scan.valid.push_back(valid);
      o.scan.ranges.push_back(valid ? world::quantize_range(4.0 + 116.0 * u(rng)) : world::kScanMaxRange);
    }
    o.gnss.valid = u(rng) < 0.9;
    if (o.gnss.valid) o.gnss.position = {2000.0 * u(rng) - 1000.0, 2000.0 * u(rng) - 1000.0};
    o.speed = 6.0 * u(rng);
    o.hlc.lateral = static_cast<expert::LateralCommand>(i % 3);
    o.hlc.longitudinal = static_cast<expert::LongitudinalCommand>((i / 3) % 3);
    for (int k = 0; k < cfg.K; ++k) {
      tg.y(i, k) = 2.0 * u(rng) - 1.0;
      for (int c = 1; c < 4; ++c) tg.y(i, c * cfg.K + k) = u(rng) < 0.3 ? 0.0 : u(rng);
    }
    tg.speed.push_back(o.speed / model::kSpeedScale);
    obs.push_back(std::move(o));
  }
  model::Batch batch = m.make_batch(obs);
  std::array<double, 4> s{0.3, -0.2, 0.1, 0.0};
  LossConfig lc;
  // Unit loss scale keeps weight probes above finite-difference resolution;
  // the full 1500 scale is checked against the head outputs.
  lc.mae_scale = 1.0;
  auto loss = [&] {
    model::ForwardState st;
    m.forward(batch, st);
    return multitask_loss(st.lat, st.lon, st.speed, cfg.K, tg, s, lc).total;
  };
  model::ForwardState st;
  m.forward(batch, st);
  LossGrad g;
  multitask_loss(st.lat, st.lon, st.speed, cfg.K, tg, s, lc, &g);
  m.params().zero_grad();
  m.backward(batch, st, g.d_lat, g.d_lon, g.d_speed);
  nn::GradCheckResult r = nn::gradient_check(m.params(), loss, rng, 2 * probes, 1e-4, 1e-6, true);
  return finish(std::string("planner[") + nn::to_string(act) + "]", Tally{r.max_rel_error, r.probes, r.worst}, tol);
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double tol, std::size_t probes) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCase> out;
  out.push_back(nig_term("nll", rng, probes, tol, [](double y, const NigParams& p, NigGrad* g) {
    return evidential_nll(y, p, g);
  }));
  for (auto form : {RegularizerForm::Paper, RegularizerForm::Standard})
    out.push_back(nig_term(form == RegularizerForm::Paper ? "regularizer[paper]" : "regularizer[standard]", rng, probes,
                           tol, [form](double y, const NigParams& p, NigGrad* g) {
                             return evidence_regularizer(y, p, form, g);
                           }));
  LossConfig mae;
  mae.evidential = false;
  out.push_back(loss_case("mae_boost", rng, probes, tol, mae, Probe::Gamma));
  out.push_back(loss_case("speed", rng, probes, tol, LossConfig{}, Probe::Speed));
  out.push_back(loss_case("task_weighting", rng, probes, tol, LossConfig{}, Probe::LogVariance));
  for (auto form : {RegularizerForm::Paper, RegularizerForm::Standard}) {
    LossConfig c;
    c.regularizer = form;
    out.push_back(loss_case(form == RegularizerForm::Paper ? "multitask[paper]" : "multitask[standard]", rng, probes,
                            tol, c, Probe::All));
  }
  for (auto act : {nn::Activation::Identity, nn::Activation::Relu, nn::Activation::Tanh, nn::Activation::Sigmoid,
                   nn::Activation::Softplus})
    out.push_back(layer_case(act, rng, probes, tol));
  for (auto act : {nn::Activation::Relu, nn::Activation::Tanh}) out.push_back(planner_case(act, rng, probes, tol));
  return out;
}

}  // namespace minehaul::objectives
