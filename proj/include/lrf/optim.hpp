#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lrf/param.hpp"

namespace lrf {

struct OptimConfig {
  double lr = 0.1;
  bool use_momentum = false;
  double momentum = 0.9;
};

/// Plain SGD (p -= lr * g), with a classical-momentum variant behind
/// use_momentum. Moment buffers are allocated lazily per param; the step
/// counter increases by exactly one per step() call.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(OptimConfig cfg);

  /// Throws NumericError if any gradient entry is non-finite.
  void step(const std::vector<Param*>& params);

  std::int64_t step_count() const { return steps_; }
  const OptimConfig& config() const { return cfg_; }

 private:
  OptimConfig cfg_;
  std::int64_t steps_ = 0;
  std::unordered_map<const Param*, Tensor> velocity_;
};

}  // namespace lrf
