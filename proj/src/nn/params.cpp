#include "minehaul/nn/params.hpp"

#include <algorithm>

#include "minehaul/errors.hpp"

namespace minehaul::nn {

std::size_t ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
  if (find(name)) throw InvalidInput("duplicate parameter " + name);
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (shape.empty() || n == 0) throw InvalidInput("empty parameter shape for " + name);
  Param p;
  p.name = name;
  p.shape = std::move(shape);
  p.value.assign(n, 0.0);
  p.grad.assign(n, 0.0);
  p.m.assign(n, 0.0);
  p.v.assign(n, 0.0);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

Param& ParamStore::get(const std::string& name) {
  auto i = find(name);
  if (!i) throw InvalidInput("no parameter " + name);
  return params_[*i];
}

const Param& ParamStore::get(const std::string& name) const {
  auto i = find(name);
  if (!i) throw InvalidInput("no parameter " + name);
  return params_[*i];
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.size();
  return n;
}

void ParamStore::init_uniform(std::size_t i, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& x : params_[i].value) x = u(rng);
}

void ParamStore::zero_grad() {
  for (Param& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

}  // namespace minehaul::nn
