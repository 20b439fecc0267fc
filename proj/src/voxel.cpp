#include "lrf/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lrf {

namespace {

using i64 = std::int64_t;

i64 axis_cells(double lo, double hi, double step, const char* axis) {
  if (!(step > 0.0)) throw ConfigError(std::string("voxel spec: ") + axis + " size must be > 0");
  if (!(hi > lo)) throw ConfigError(std::string("voxel spec: empty ") + axis + " range");
  const double n = (hi - lo) / step;
  const i64 ni = static_cast<i64>(std::llround(n));
  if (ni <= 0 || std::fabs(n - static_cast<double>(ni)) > 1e-9)
    throw ConfigError(std::string("voxel spec: ") + axis +
                      " extent is not a whole multiple of the voxel size");
  return ni;
}

// Canonical within-cell point order: lexicographic on the 9 stacked fields,
// lidar before radar on full ties. Makes per-cell means independent of input
// point order (below the capacity caps).
bool canonical_less(const StackedPoint& a, const StackedPoint& b) {
  for (int i = 0; i < StackedPoint::kDims; ++i) {
    if (a.f[i] != b.f[i]) return a.f[i] < b.f[i];
  }
  return a.tag < b.tag;
}

}  // namespace

i64 VoxelGridSpec::nx() const { return axis_cells(x0, x1, dx, "x"); }
i64 VoxelGridSpec::ny() const { return axis_cells(y0, y1, dy, "y"); }
i64 VoxelGridSpec::nz() const { return axis_cells(z0, z1, dz, "z"); }

void VoxelGridSpec::validate() const {
  nx();
  ny();
  nz();
  if (max_lidar_per_voxel < 1 || max_radar_per_voxel < 1)
    throw ConfigError("voxel spec: per-voxel point caps must be >= 1");
}

VoxelGridSpec VoxelGridSpec::pillar_spec() const {
  VoxelGridSpec p = *this;
  p.dz = z1 - z0;
  return p;
}

const VoxelCell* SparseVoxelGrid::find(VoxelCoord c) const {
  const i64 key = (static_cast<i64>(c.ix) * spec_.ny() + c.iy) * spec_.nz() + c.iz;
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &cells_[it->second].second;
}

VoxelCell& SparseVoxelGrid::cell(VoxelCoord c) {
  const i64 key = (static_cast<i64>(c.ix) * spec_.ny() + c.iy) * spec_.nz() + c.iz;
  auto [it, inserted] = index_.try_emplace(key, cells_.size());
  if (inserted) cells_.emplace_back(c, VoxelCell{});
  return cells_[it->second].second;
}

void SparseVoxelGrid::finalize() {
  std::sort(cells_.begin(), cells_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  index_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const VoxelCoord& c = cells_[i].first;
    const i64 key = (static_cast<i64>(c.ix) * spec_.ny() + c.iy) * spec_.nz() + c.iz;
    index_.emplace(key, i);
  }
  finalized_ = true;
}

SparseVoxelGrid voxelize(const std::vector<StackedPoint>& points, const VoxelGridSpec& spec) {
  spec.validate();
  const i64 nx = spec.nx(), ny = spec.ny(), nz = spec.nz();
  SparseVoxelGrid grid(spec);
  for (const StackedPoint& p : points) {
    const i64 ix = static_cast<i64>(std::floor((p.x() - spec.x0) / spec.dx));
    const i64 iy = static_cast<i64>(std::floor((p.y() - spec.y0) / spec.dy));
    const i64 iz = static_cast<i64>(std::floor((p.z() - spec.z0) / spec.dz));
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny || iz < 0 || iz >= nz) continue;
    VoxelCell& cell = grid.cell(VoxelCoord{static_cast<std::int32_t>(ix),
                                           static_cast<std::int32_t>(iy),
                                           static_cast<std::int32_t>(iz)});
    if (p.tag == Modality::kLidar) {
      if (static_cast<int>(cell.lidar.size()) < spec.max_lidar_per_voxel) cell.lidar.push_back(p);
    } else {
      if (static_cast<int>(cell.radar.size()) < spec.max_radar_per_voxel) cell.radar.push_back(p);
    }
  }
  grid.finalize();
  return grid;
}

JointEncoderParams JointEncoderParams::init(std::uint64_t seed, const std::string& prefix) {
  Rng rng(derive_seed(seed, hash64(prefix + ".weight")));
  Tensor w({4, 4});
  for (i64 i = 0; i < 4; ++i)
    for (i64 j = 0; j < 4; ++j) w.at(i, j) = (i == j ? 1.0 : 0.0) + rng.normal(0.0, 0.01);
  JointEncoderParams p;
  p.weight = Param(prefix + ".weight", std::move(w));
  p.bias = Param(prefix + ".bias", Tensor({4}));
  return p;
}

VoxelFeature EncodedVoxels::feature_at(const Tape& tape, std::size_t row) const {
  const Tensor& f = tape.val(features);
  VoxelFeature out;
  for (int j = 0; j < 9; ++j) out.v[static_cast<std::size_t>(j)] = f.at(static_cast<i64>(row), j);
  return out;
}

EncodedVoxels encode_voxels(Tape& tape, const SparseVoxelGrid& grid, JointEncoderParams& params) {
  const i64 n = static_cast<i64>(grid.size());
  EncodedVoxels out;
  out.coords.reserve(grid.size());

  if (n == 0) {
    // Degenerate empty grid: a single all-zero row keeps downstream shapes
    // valid; scatter_to_bev skips it via the empty coord list.
    out.features = tape.constant(Tensor({1, 9}));
    return out;
  }

  Tensor base({n, 9});
  std::vector<double> radar_means;  // M x 4
  std::vector<i64> radar_rows;      // M
  std::vector<StackedPoint> scratch;

  i64 row = 0;
  for (const auto& [coord, cell] : grid.cells()) {
    out.coords.push_back(coord);

    scratch.clear();
    scratch.insert(scratch.end(), cell.lidar.begin(), cell.lidar.end());
    scratch.insert(scratch.end(), cell.radar.begin(), cell.radar.end());
    std::sort(scratch.begin(), scratch.end(), canonical_less);

    double cx = 0, cy = 0, cz = 0;
    for (const StackedPoint& p : scratch) {
      cx += p.x();
      cy += p.y();
      cz += p.z();
    }
    const double inv_all = 1.0 / static_cast<double>(scratch.size());
    base.at(row, 0) = cx * inv_all;
    base.at(row, 1) = cy * inv_all;
    base.at(row, 2) = cz * inv_all;

    if (!cell.lidar.empty()) {
      double s_int = 0, s_dt = 0;
      for (const StackedPoint& p : scratch) {
        if (p.tag != Modality::kLidar) continue;
        s_int += p.f[StackedPoint::kIntensity];
        s_dt += p.f[StackedPoint::kDtLidar];
      }
      const double inv = 1.0 / static_cast<double>(cell.lidar.size());
      base.at(row, 3) = s_int * inv;
      base.at(row, 4) = s_dt * inv;
    }

    if (!cell.radar.empty()) {
      double m[4] = {0, 0, 0, 0};
      for (const StackedPoint& p : scratch) {
        if (p.tag != Modality::kRadar) continue;
        m[0] += p.f[StackedPoint::kRcs];
        m[1] += p.f[StackedPoint::kVx];
        m[2] += p.f[StackedPoint::kVy];
        m[3] += p.f[StackedPoint::kDtRadar];
      }
      const double inv = 1.0 / static_cast<double>(cell.radar.size());
      for (double& v : m) v *= inv;
      radar_means.insert(radar_means.end(), {m[0], m[1], m[2], m[3]});
      radar_rows.push_back(row);
    }
    ++row;
  }

  ValueId base_id = tape.constant(std::move(base));
  if (radar_rows.empty()) {
    out.features = base_id;
    return out;
  }

  const i64 m_rows = static_cast<i64>(radar_rows.size());
  ValueId means_id = tape.constant(Tensor({m_rows, 4}, std::move(radar_means)));
  ValueId transformed = tape.linear(means_id, tape.leaf(params.weight), tape.leaf(params.bias));

  std::vector<i64> targets(static_cast<std::size_t>(m_rows) * 4);
  for (i64 i = 0; i < m_rows; ++i)
    for (i64 j = 0; j < 4; ++j)
      targets[static_cast<std::size_t>(i * 4 + j)] = radar_rows[static_cast<std::size_t>(i)] * 9 + 5 + j;
  ValueId radar_part = tape.scatter_add(transformed, {n, 9}, std::move(targets), {});
  out.features = tape.add(base_id, radar_part);
  return out;
}

ValueId scatter_to_bev(Tape& tape, const EncodedVoxels& encoded, const VoxelGridSpec& spec,
                       ScatterMode mode) {
  const i64 nx = spec.nx(), ny = spec.ny(), nz = spec.nz();
  const i64 H = ny, W = nx;
  const i64 n = static_cast<i64>(encoded.coords.size());

  for (const VoxelCoord& c : encoded.coords) {
    if (c.ix < 0 || c.ix >= nx || c.iy < 0 || c.iy >= ny || c.iz < 0 || c.iz >= nz)
      throw ContractError("scatter_to_bev: voxel coord (" + std::to_string(c.ix) + "," +
                          std::to_string(c.iy) + "," + std::to_string(c.iz) +
                          ") outside the grid");
  }

  const i64 channels = mode == ScatterMode::kZSlice ? 9 * nz : 9;
  if (n == 0) return tape.constant(Tensor({channels, H, W}));

  std::vector<i64> targets(static_cast<std::size_t>(n) * 9);
  std::vector<double> coeffs;

  if (mode == ScatterMode::kZSlice) {
    for (i64 i = 0; i < n; ++i) {
      const VoxelCoord& c = encoded.coords[static_cast<std::size_t>(i)];
      for (i64 f = 0; f < 9; ++f) {
        const i64 ch = 9 * c.iz + f;
        targets[static_cast<std::size_t>(i * 9 + f)] = (ch * H + c.iy) * W + c.ix;
      }
    }
  } else {
    std::unordered_map<i64, i64> column_count;
    for (const VoxelCoord& c : encoded.coords) ++column_count[static_cast<i64>(c.iy) * W + c.ix];
    coeffs.resize(static_cast<std::size_t>(n));
    for (i64 i = 0; i < n; ++i) {
      const VoxelCoord& c = encoded.coords[static_cast<std::size_t>(i)];
      const i64 col = static_cast<i64>(c.iy) * W + c.ix;
      coeffs[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(column_count[col]);
      for (i64 f = 0; f < 9; ++f)
        targets[static_cast<std::size_t>(i * 9 + f)] = (f * H + c.iy) * W + c.ix;
    }
  }

  return tape.scatter_add(encoded.features, {channels, H, W}, std::move(targets),
                          std::move(coeffs));
}

}  // namespace lrf
