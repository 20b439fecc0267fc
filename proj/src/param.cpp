#include "lrf/param.hpp"

#include <cmath>

namespace lrf {

Tensor xavier_uniform(std::vector<std::int64_t> shape, std::int64_t fan_in, std::int64_t fan_out,
                      Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

Param make_conv_param(const std::string& name, std::int64_t cout, std::int64_t cin, std::int64_t k,
                      std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash64(name)));
  return Param(name, xavier_uniform({cout, cin, k, k}, cin * k * k, cout * k * k, rng));
}

Param make_bias_param(const std::string& name, std::int64_t n) {
  return Param(name, Tensor({n}));
}

Param make_linear_param(const std::string& name, std::int64_t din, std::int64_t dout,
                        std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash64(name)));
  return Param(name, xavier_uniform({din, dout}, din, dout, rng));
}

}  // namespace lrf
