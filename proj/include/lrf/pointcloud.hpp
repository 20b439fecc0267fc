#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lrf/errors.hpp"

namespace lrf {

enum class Modality : std::uint8_t { kLidar = 0, kRadar = 1 };

struct LidarPoint {
  double x = 0, y = 0, z = 0;
  double intensity = 0;  // [0,1]
  double dt = 0;         // seconds behind the key frame, >= 0
};

struct RadarPoint {
  double x = 0, y = 0, z = 0;
  double rcs = 0;
  double vx = 0, vy = 0;  // ego-motion-compensated velocity, m/s
  double dt = 0;
};

/// A point from either modality zero-padded into one fixed 9-float layout:
/// [x, y, z, intensity, dt_lidar, rcs, vx, vy, dt_radar]. Lidar points carry
/// exact zeros in fields 5..8, radar points in fields 3..4. The layout is
/// normative for the voxel encoder and the on-disk point format.
struct StackedPoint {
  static constexpr int kX = 0, kY = 1, kZ = 2;
  static constexpr int kIntensity = 3, kDtLidar = 4;
  static constexpr int kRcs = 5, kVx = 6, kVy = 7, kDtRadar = 8;
  static constexpr int kDims = 9;

  std::array<double, kDims> f{};
  Modality tag = Modality::kLidar;

  double x() const { return f[kX]; }
  double y() const { return f[kY]; }
  double z() const { return f[kZ]; }

  static StackedPoint from(const LidarPoint& p);
  static StackedPoint from(const RadarPoint& p);
  LidarPoint to_lidar() const;  // requires tag == kLidar
  RadarPoint to_radar() const;  // requires tag == kRadar
};

/// 2D rigid transform (sweep frame -> key frame). z, roll, and pitch are
/// assumed zero throughout.
struct Pose2 {
  double tx = 0, ty = 0, yaw = 0;

  bool is_identity() const { return tx == 0 && ty == 0 && yaw == 0; }
};

struct LidarSweep {
  std::vector<LidarPoint> points;
  Pose2 pose;
  double time_offset = 0;  // seconds behind the key frame
};

struct RadarSweep {
  std::vector<RadarPoint> points;
  Pose2 pose;
  double time_offset = 0;
};

/// Merges sweeps into the key frame: positions are transformed by each
/// sweep's pose, radar velocity vectors are rotated by the pose yaw (they are
/// metric vectors, so they do not translate), and every point's dt is stamped
/// with the sweep's time offset. Sweeps must be ordered newest first with the
/// key frame (identity pose, offset 0) leading; at most max_sweeps are kept.
std::vector<LidarPoint> accumulate_sweeps(const std::vector<LidarSweep>& sweeps, int max_sweeps);
std::vector<RadarPoint> accumulate_sweeps(const std::vector<RadarSweep>& sweeps, int max_sweeps);

/// Zero-padded merge, lidar first then radar.
std::vector<StackedPoint> stack_modalities(const std::vector<LidarPoint>& lidar,
                                           const std::vector<RadarPoint>& radar);

}  // namespace lrf
