#include "lrf/optim.hpp"

#include <cmath>

#include "lrf/errors.hpp"

namespace lrf {

SgdOptimizer::SgdOptimizer(OptimConfig cfg) : cfg_(cfg) {
  if (cfg_.lr < 0.0 || !std::isfinite(cfg_.lr))
    throw ConfigError("sgd: learning rate must be finite and non-negative");
  if (cfg_.use_momentum && !(cfg_.momentum >= 0.0 && cfg_.momentum < 1.0))
    throw ConfigError("sgd: momentum must lie in [0, 1)");
}

void SgdOptimizer::step(const std::vector<Param*>& params) {
  for (Param* p : params) {
    if (!p->grad.all_finite())
      throw NumericError("sgd: non-finite gradient in param '" + p->name + "'");
  }
  for (Param* p : params) {
    if (cfg_.use_momentum) {
      auto [it, inserted] = velocity_.try_emplace(p, p->grad.shape());
      Tensor& v = it->second;
      for (std::int64_t i = 0; i < v.numel(); ++i) {
        v[i] = cfg_.momentum * v[i] + p->grad[i];
        p->value[i] -= cfg_.lr * v[i];
      }
    } else {
      for (std::int64_t i = 0; i < p->value.numel(); ++i) p->value[i] -= cfg_.lr * p->grad[i];
    }
  }
  ++steps_;
}

}  // namespace lrf
