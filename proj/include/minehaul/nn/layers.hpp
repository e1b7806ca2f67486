#pragma once

#include <random>
#include <string>
#include <vector>

#include "minehaul/nn/matrix.hpp"
#include "minehaul/nn/params.hpp"

namespace minehaul::nn {

enum class Activation { Identity, Relu, Tanh, Sigmoid, Softplus };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

double activate(Activation a, double x);
/// Derivative given the input x and output y = activate(a, x).
double activate_grad(Activation a, double x, double y);

struct LayerSpec {
  enum class Kind { Dense, Act };
  Kind kind = Kind::Dense;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  Activation activation = Activation::Identity;

  static LayerSpec dense(std::size_t in, std::size_t out) { return {Kind::Dense, in, out, Activation::Identity}; }
  static LayerSpec act(Activation a, std::size_t width) { return {Kind::Act, width, width, a}; }
};

/// Stack of dense and activation layers whose weights live in a ParamStore
/// under `<name>.<i>.W` ([in][out]) and `<name>.<i>.b`.
class Sequential {
 public:
  Sequential() = default;
  Sequential(std::string name, std::vector<LayerSpec> layers, ParamStore& store);

  /// Uniform +/- sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  void init(ParamStore& store, std::mt19937_64& rng) const;

  std::size_t input_width() const { return layers_.front().fan_in; }
  std::size_t output_width() const { return layers_.back().fan_out; }
  const std::string& name() const { return name_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  /// acts[0] is the input, acts[i + 1] the output of layer i.
  struct Tape {
    std::vector<Matrix> acts;
  };

  const Matrix& forward(const ParamStore& store, const Matrix& x, Tape& tape) const;
  Matrix forward(const ParamStore& store, const Matrix& x) const;
  /// Accumulates parameter gradients; writes the input gradient when dx != nullptr.
  void backward(ParamStore& store, const Tape& tape, const Matrix& dy, Matrix* dx) const;

 private:
  std::string name_;
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> weight_;  // param index per layer (dense only)
  std::vector<std::size_t> bias_;
};

}  // namespace minehaul::nn
