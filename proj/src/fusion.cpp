#include "lrf/fusion.hpp"

#include <cmath>

namespace lrf {

std::string to_string(GateMode m) {
  return m == GateMode::kChannelSpecific ? "CHANNEL_SPECIFIC" : "CHANNEL_CONSTANT";
}

GateMode gate_mode_from_string(const std::string& s) {
  if (s == "CHANNEL_SPECIFIC") return GateMode::kChannelSpecific;
  if (s == "CHANNEL_CONSTANT") return GateMode::kChannelConstant;
  throw ConfigError("unknown gate mode '" + s + "'");
}

void GateConfig::validate() const {
  if (kernel < 1 || kernel % 2 == 0)
    throw ConfigError("gate kernel size must be odd and positive, got " + std::to_string(kernel));
}

GatedFusionParams GatedFusionParams::init(std::int64_t c1, std::int64_t c2,
                                          const GateConfig& config, std::uint64_t seed) {
  config.validate();
  const std::int64_t cin = c1 + c2;
  const std::int64_t out_l = config.mode == GateMode::kChannelSpecific ? c1 : 1;
  const std::int64_t out_r = config.mode == GateMode::kChannelSpecific ? c2 : 1;
  GatedFusionParams p;
  p.lidar_weight = make_conv_param("gate.lidar.weight", out_l, cin, config.kernel, seed);
  p.lidar_bias = make_bias_param("gate.lidar.bias", out_l);
  p.radar_weight = make_conv_param("gate.radar.weight", out_r, cin, config.kernel, seed);
  p.radar_bias = make_bias_param("gate.radar.bias", out_r);
  return p;
}

GatedFuseResult gated_fuse(Tape& tape, ValueId lidar, ValueId radar, GatedFusionParams& params,
                           const GateConfig& config) {
  config.validate();
  const Tensor& lv = tape.val(lidar);
  const Tensor& rv = tape.val(radar);
  if (lv.rank() != 4 || rv.rank() != 4)
    throw DimError("gated_fuse: expert maps must be rank 4, got " + lv.shape_str() + " and " +
                   rv.shape_str());
  if (lv.extent(0) != rv.extent(0) || lv.extent(2) != rv.extent(2) ||
      lv.extent(3) != rv.extent(3))
    throw DimError("gated_fuse: batch/spatial mismatch " + lv.shape_str() + " vs " +
                   rv.shape_str());

  const std::int64_t c1 = lv.extent(1), c2 = rv.extent(1);
  ValueId cat = tape.concat_channels(lidar, radar);

  ValueId wl = tape.sigmoid(
      tape.conv2d(cat, tape.leaf(params.lidar_weight), tape.leaf(params.lidar_bias)));
  ValueId wr = tape.sigmoid(
      tape.conv2d(cat, tape.leaf(params.radar_weight), tape.leaf(params.radar_bias)));
  if (config.mode == GateMode::kChannelConstant) {
    wl = tape.broadcast_channels(wl, c1);
    wr = tape.broadcast_channels(wr, c2);
  }

  GatedFuseResult out;
  out.lidar_weights = wl;
  out.radar_weights = wr;
  out.fused = tape.concat_channels(tape.mul(wl, lidar), tape.mul(wr, radar));
  return out;
}

Tensor export_weight_map(const Tensor& weights) {
  if (weights.rank() != 4)
    throw DimError("export_weight_map: expected (B,C,H,W), got " + weights.shape_str());
  const std::int64_t C = weights.extent(1), H = weights.extent(2), W = weights.extent(3);
  Tensor out({H, W});
  const double inv = 1.0 / static_cast<double>(C);
  for (std::int64_t h = 0; h < H; ++h)
    for (std::int64_t w = 0; w < W; ++w) {
      double acc = 0.0;
      for (std::int64_t c = 0; c < C; ++c) acc += weights.at(0, c, h, w);
      out.at(h, w) = acc * inv;
    }
  return out;
}

WeightStats gate_stats(const Tensor& weights, const std::vector<RangeBin>& bins,
                       const VoxelGridSpec& geom) {
  if (weights.rank() != 4)
    throw DimError("gate_stats: expected (B,C,H,W), got " + weights.shape_str());
  const std::int64_t C = weights.extent(1), H = weights.extent(2), W = weights.extent(3);

  WeightStats stats;
  double total = 0.0;
  std::int64_t total_n = 0;
  std::vector<double> bin_sum(bins.size(), 0.0);
  std::vector<std::int64_t> bin_n(bins.size(), 0);

  for (std::int64_t h = 0; h < H; ++h) {
    for (std::int64_t w = 0; w < W; ++w) {
      const double r = std::hypot(geom.cell_center_x(w), geom.cell_center_y(h));
      double cell_sum = 0.0;
      for (std::int64_t c = 0; c < C; ++c) cell_sum += weights.at(0, c, h, w);
      total += cell_sum;
      total_n += C;
      for (std::size_t b = 0; b < bins.size(); ++b) {
        if (r >= bins[b].lo && r < bins[b].hi) {
          bin_sum[b] += cell_sum;
          bin_n[b] += C;
        }
      }
    }
  }

  if (total_n > 0) stats.overall = total / static_cast<double>(total_n);
  stats.per_bin.resize(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b)
    if (bin_n[b] > 0) stats.per_bin[b] = bin_sum[b] / static_cast<double>(bin_n[b]);
  return stats;
}

}  // namespace lrf
