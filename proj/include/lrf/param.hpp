#pragma once

#include <string>
#include <utility>

#include "lrf/rng.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

/// A learnable tensor with its gradient accumulator. grad always matches the
/// value shape and is all-zero right after zero_grad().
struct Param {
  Tensor value;
  Tensor grad;
  std::string name;

  Param() = default;
  Param(std::string n, Tensor init)
      : value(std::move(init)), grad(value.shape()), name(std::move(n)) {}

  void zero_grad() { grad.fill(0.0); }
};

/// Xavier-uniform sample: U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::vector<std::int64_t> shape, std::int64_t fan_in, std::int64_t fan_out,
                      Rng& rng);

/// Conv kernel (cout,cin,k,k) with Xavier fan-in cin*k*k / fan-out cout*k*k;
/// the stream seed is derived from (seed, name) so initialization does not
/// depend on parameter construction order.
Param make_conv_param(const std::string& name, std::int64_t cout, std::int64_t cin, std::int64_t k,
                      std::uint64_t seed);
Param make_bias_param(const std::string& name, std::int64_t n);
Param make_linear_param(const std::string& name, std::int64_t din, std::int64_t dout,
                        std::uint64_t seed);

}  // namespace lrf
