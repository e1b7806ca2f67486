#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace minehaul::nn {

struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment

  std::size_t size() const { return value.size(); }
};

/// Named parameter tensors with gradients and optimizer moments.
class ParamStore {
 public:
  /// Adds a zero tensor; throws InvalidInput on duplicate names or empty shapes.
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);
  std::optional<std::size_t> find(const std::string& name) const;
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::size_t total_size() const;

  /// Uniform in +/- bound.
  void init_uniform(std::size_t i, double bound, std::mt19937_64& rng);
  void zero_grad();

  std::uint64_t step = 0;

 private:
  std::vector<Param> params_;
};

}  // namespace minehaul::nn
