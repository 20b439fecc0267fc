#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrf/tape.hpp"
#include "lrf/voxel.hpp"

namespace lrf {

enum class GateMode { kChannelSpecific, kChannelConstant };

std::string to_string(GateMode m);
GateMode gate_mode_from_string(const std::string& s);

struct GateConfig {
  GateMode mode = GateMode::kChannelSpecific;
  int kernel = 3;  // odd

  void validate() const;
};

/// One conv block per expert, both consuming the concatenated (C1+C2)-channel
/// map. Channel-specific blocks emit C1 / C2 weight channels, channel-constant
/// blocks emit a single channel that is broadcast across the expert's
/// channels.
struct GatedFusionParams {
  Param lidar_weight, lidar_bias;
  Param radar_weight, radar_bias;

  static GatedFusionParams init(std::int64_t c1, std::int64_t c2, const GateConfig& config,
                                std::uint64_t seed);
  std::vector<Param*> all() {
    return {&lidar_weight, &lidar_bias, &radar_weight, &radar_bias};
  }
};

struct GatedFuseResult {
  ValueId fused = -1;        // (B, C1+C2, H, W)
  ValueId lidar_weights = -1;  // (B, C1, H, W), materialized in constant mode too
  ValueId radar_weights = -1;  // (B, C2, H, W)
};

/// Adaptive gated fusion of two expert BEV maps: sigmoid conv gates over the
/// concatenated input weight each expert elementwise, and the weighted maps
/// are concatenated (lidar first). Differentiable wrt params and both inputs.
GatedFuseResult gated_fuse(Tape& tape, ValueId lidar, ValueId radar, GatedFusionParams& params,
                           const GateConfig& config);

/// Per-pixel channel mean of batch entry 0: an HxW grayscale map in (0,1).
Tensor export_weight_map(const Tensor& weights);

struct RangeBin {
  double lo = 0, hi = 0;  // [lo, hi), hi may be +inf
};

struct WeightStats {
  std::optional<double> overall;
  std::vector<std::optional<double>> per_bin;  // absent for empty annuli
};

/// Mean gate weight overall and per range annulus (range measured from the
/// grid origin to each BEV cell center). weights: (B,C,H,W), batch entry 0.
WeightStats gate_stats(const Tensor& weights, const std::vector<RangeBin>& bins,
                       const VoxelGridSpec& geom);

}  // namespace lrf
