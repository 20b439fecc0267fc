#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lrf/pointcloud.hpp"
#include "lrf/tape.hpp"

namespace lrf {

/// Axis-aligned voxel grid over half-open ranges [min, max) per axis; points
/// exactly at a max bound fall outside. Extents must be whole multiples of
/// the voxel size (within 1e-9).
struct VoxelGridSpec {
  double x0 = -32.0, x1 = 32.0;
  double y0 = -32.0, y1 = 32.0;
  double z0 = -3.0, z1 = 5.0;
  double dx = 0.5, dy = 0.5, dz = 2.0;
  int max_lidar_per_voxel = 16;
  int max_radar_per_voxel = 8;

  std::int64_t nx() const;
  std::int64_t ny() const;
  std::int64_t nz() const;
  void validate() const;  // throws ConfigError

  /// Same x/y layout with a single z slice spanning the full z extent.
  VoxelGridSpec pillar_spec() const;

  /// Metric center of BEV cell (h=iy, w=ix).
  double cell_center_x(std::int64_t ix) const { return x0 + (static_cast<double>(ix) + 0.5) * dx; }
  double cell_center_y(std::int64_t iy) const { return y0 + (static_cast<double>(iy) + 0.5) * dy; }
};

struct VoxelCoord {
  std::int32_t ix = 0, iy = 0, iz = 0;

  bool operator==(const VoxelCoord&) const = default;
  // Lexicographic (ix, iy, iz); the canonical cell ordering everywhere.
  bool operator<(const VoxelCoord& o) const {
    if (ix != o.ix) return ix < o.ix;
    if (iy != o.iy) return iy < o.iy;
    return iz < o.iz;
  }
};

/// Per-cell point lists, capped per modality at the spec's caps (first points
/// in input order win).
struct VoxelCell {
  std::vector<StackedPoint> lidar;
  std::vector<StackedPoint> radar;

  bool empty() const { return lidar.empty() && radar.empty(); }
};

/// Only non-empty cells are stored. Cells are hash-indexed during
/// construction and exposed sorted by coordinate.
class SparseVoxelGrid {
 public:
  explicit SparseVoxelGrid(VoxelGridSpec spec) : spec_(spec) {}

  const VoxelGridSpec& spec() const { return spec_; }
  std::size_t size() const { return cells_.size(); }

  const std::vector<std::pair<VoxelCoord, VoxelCell>>& cells() const { return cells_; }
  const VoxelCell* find(VoxelCoord c) const;

  // Construction interface used by voxelize().
  VoxelCell& cell(VoxelCoord c);
  void finalize();  // sorts cells by coordinate

 private:
  VoxelGridSpec spec_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  std::vector<std::pair<VoxelCoord, VoxelCell>> cells_;
  bool finalized_ = false;
};

/// Bins points into non-empty voxel cells. Points outside the range are
/// dropped; per-modality overflow keeps the first points in input order.
SparseVoxelGrid voxelize(const std::vector<StackedPoint>& points, const VoxelGridSpec& spec);

/// The 9-dim per-voxel feature: [cx, cy, cz, lidar-intensity mean, lidar-dt
/// mean, 4 linearly transformed radar means]. Cells without radar points keep
/// the last four dims exactly zero (the linear layer is skipped, bias
/// included).
struct VoxelFeature {
  std::array<double, 9> v{};
};

/// The 4x4 layer applied to per-cell radar feature means. Initialized close
/// to identity with zero bias so early training passes radar means through.
struct JointEncoderParams {
  Param weight;  // 4x4
  Param bias;    // 4

  static JointEncoderParams init(std::uint64_t seed, const std::string& prefix = "encoder");
  std::vector<Param*> all() { return {&weight, &bias}; }
};

/// Differentiable per-cell features, one row per non-empty cell, rows ordered
/// by the grid's sorted coordinates.
struct EncodedVoxels {
  std::vector<VoxelCoord> coords;
  ValueId features = -1;  // (N, 9) on the tape

  VoxelFeature feature_at(const Tape& tape, std::size_t row) const;
};

/// Joint voxel feature encoding: centroid over all points in the cell, lidar
/// attribute means, and the 4x4 layer over the radar attribute means. Only
/// the radar dims depend on params. Per-cell means accumulate over points in
/// a canonical sorted order, so results do not depend on input point order.
EncodedVoxels encode_voxels(Tape& tape, const SparseVoxelGrid& grid, JointEncoderParams& params);

enum class ScatterMode { kPillar, kZSlice };

/// Scatters encoded voxel features onto a dense BEV tensor (h = iy, w = ix).
/// kZSlice: (9*nz, H, W), slice iz occupies channels [9*iz, 9*iz+9).
/// kPillar: (9, H, W), cells sharing a column are mean-pooled per feature dim.
/// Empty cells contribute zeros. Coords outside the spec raise ContractError.
ValueId scatter_to_bev(Tape& tape, const EncodedVoxels& encoded, const VoxelGridSpec& spec,
                       ScatterMode mode);

}  // namespace lrf
