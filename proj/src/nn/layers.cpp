#include "minehaul/nn/layers.hpp"

#include <cmath>

#include "minehaul/errors.hpp"
#include "minehaul/nn/kernels.hpp"

namespace minehaul::nn {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softplus: return "softplus";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  for (Activation a : {Activation::Identity, Activation::Relu, Activation::Tanh, Activation::Sigmoid,
                       Activation::Softplus})
    if (s == to_string(a)) return a;
  throw ParseError("unknown activation '" + s + "'");
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Softplus: return softplus(x);
  }
  return x;
}

double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Softplus: return sigmoid(x);
  }
  return 1.0;
}

Sequential::Sequential(std::string name, std::vector<LayerSpec> layers, ParamStore& store)
    : name_(std::move(name)), layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInput(name_ + ": no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    std::string where = name_ + "." + std::to_string(i);
    if (l.fan_in == 0 || l.fan_out == 0) throw DimensionError(where + ": zero width");
    if (i > 0 && layers_[i - 1].fan_out != l.fan_in)
      throw DimensionError(where + ": fan-in " + std::to_string(l.fan_in) + " after width " +
                           std::to_string(layers_[i - 1].fan_out));
    if (l.kind == LayerSpec::Kind::Act && l.fan_in != l.fan_out) throw DimensionError(where + ": activation changes width");
    if (l.kind == LayerSpec::Kind::Dense) {
      weight_.push_back(store.add(where + ".W", {l.fan_in, l.fan_out}));
      bias_.push_back(store.add(where + ".b", {l.fan_out}));
    } else {
      weight_.push_back(0);
      bias_.push_back(0);
    }
  }
}

void Sequential::init(ParamStore& store, std::mt19937_64& rng) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (l.kind != LayerSpec::Kind::Dense) continue;
    store.init_uniform(weight_[i], std::sqrt(6.0 / static_cast<double>(l.fan_in + l.fan_out)), rng);
    auto& b = store[bias_[i]].value;
    std::fill(b.begin(), b.end(), 0.0);
  }
}

const Matrix& Sequential::forward(const ParamStore& store, const Matrix& x, Tape& tape) const {
  if (x.cols != input_width())
    throw DimensionError(name_ + ".0: input width " + std::to_string(x.cols) + ", expected " +
                         std::to_string(input_width()));
  tape.acts.resize(layers_.size() + 1);
  tape.acts[0] = x;
  const std::size_t n = x.rows;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const Matrix& in = tape.acts[i];
    Matrix& out = tape.acts[i + 1];
    out.resize(n, l.fan_out);
    if (l.kind == LayerSpec::Kind::Dense) {
      kernels::dense_forward(in.data.data(), store[weight_[i]].value.data(), store[bias_[i]].value.data(),
                             out.data.data(), n, l.fan_in, l.fan_out);
    } else {
      for (std::size_t j = 0; j < in.data.size(); ++j) out.data[j] = activate(l.activation, in.data[j]);
    }
  }
  return tape.acts.back();
}

Matrix Sequential::forward(const ParamStore& store, const Matrix& x) const {
  Tape tape;
  forward(store, x, tape);
  return std::move(tape.acts.back());
}

void Sequential::backward(ParamStore& store, const Tape& tape, const Matrix& dy, Matrix* dx) const {
  if (tape.acts.size() != layers_.size() + 1) throw InvalidInput(name_ + ": backward without forward");
  const std::size_t n = tape.acts[0].rows;
  if (dy.rows != n || dy.cols != output_width())
    throw DimensionError(name_ + "." + std::to_string(layers_.size() - 1) + ": upstream gradient shape mismatch");
  Matrix g = dy, next;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerSpec& l = layers_[i];
    const Matrix& in = tape.acts[i];
    bool need_input = i > 0 || dx != nullptr;
    if (l.kind == LayerSpec::Kind::Dense) {
      Param& W = store[weight_[i]];
      Param& b = store[bias_[i]];
      kernels::dense_backward_params(in.data.data(), g.data.data(), W.grad.data(), b.grad.data(), n, l.fan_in,
                                     l.fan_out);
      if (need_input) {
        next.resize(n, l.fan_in);
        kernels::dense_backward_input(g.data.data(), W.value.data(), next.data.data(), n, l.fan_in, l.fan_out);
        std::swap(g, next);
      }
    } else {
      const Matrix& out = tape.acts[i + 1];
      for (std::size_t j = 0; j < g.data.size(); ++j) g.data[j] *= activate_grad(l.activation, in.data[j], out.data[j]);
    }
  }
  if (dx) *dx = std::move(g);
}

}  // namespace minehaul::nn
