#include "lrf/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace lrf {

StackedPoint StackedPoint::from(const LidarPoint& p) {
  StackedPoint s;
  s.tag = Modality::kLidar;
  s.f[kX] = p.x;
  s.f[kY] = p.y;
  s.f[kZ] = p.z;
  s.f[kIntensity] = p.intensity;
  s.f[kDtLidar] = p.dt;
  return s;
}

StackedPoint StackedPoint::from(const RadarPoint& p) {
  StackedPoint s;
  s.tag = Modality::kRadar;
  s.f[kX] = p.x;
  s.f[kY] = p.y;
  s.f[kZ] = p.z;
  s.f[kRcs] = p.rcs;
  s.f[kVx] = p.vx;
  s.f[kVy] = p.vy;
  s.f[kDtRadar] = p.dt;
  return s;
}

LidarPoint StackedPoint::to_lidar() const {
  if (tag != Modality::kLidar) throw ContractError("to_lidar: point is radar-tagged");
  return LidarPoint{f[kX], f[kY], f[kZ], f[kIntensity], f[kDtLidar]};
}

RadarPoint StackedPoint::to_radar() const {
  if (tag != Modality::kRadar) throw ContractError("to_radar: point is lidar-tagged");
  return RadarPoint{f[kX], f[kY], f[kZ], f[kRcs], f[kVx], f[kVy], f[kDtRadar]};
}

namespace {

struct RotatedPose {
  double c, s, tx, ty;

  explicit RotatedPose(const Pose2& p)
      : c(std::cos(p.yaw)), s(std::sin(p.yaw)), tx(p.tx), ty(p.ty) {}
};

template <typename Sweep, typename Point>
std::vector<Point> accumulate_impl(const std::vector<Sweep>& sweeps, int max_sweeps) {
  if (sweeps.empty()) throw InputError("accumulate_sweeps: empty sweep list");
  const std::size_t keep =
      std::min<std::size_t>(sweeps.size(), max_sweeps < 0 ? 0 : static_cast<std::size_t>(max_sweeps));

  std::vector<Point> out;
  std::size_t total = 0;
  for (std::size_t i = 0; i < keep; ++i) total += sweeps[i].points.size();
  out.reserve(total);

  for (std::size_t i = 0; i < keep; ++i) {
    const Sweep& sw = sweeps[i];
    if (sw.pose.is_identity()) {
      for (const Point& p : sw.points) {
        Point q = p;
        q.dt = sw.time_offset;
        out.push_back(q);
      }
      continue;
    }
    const RotatedPose rp(sw.pose);
    for (const Point& p : sw.points) {
      Point q = p;
      q.x = rp.c * p.x - rp.s * p.y + rp.tx;
      q.y = rp.s * p.x + rp.c * p.y + rp.ty;
      q.dt = sw.time_offset;
      if constexpr (std::is_same_v<Point, RadarPoint>) {
        q.vx = rp.c * p.vx - rp.s * p.vy;
        q.vy = rp.s * p.vx + rp.c * p.vy;
      }
      out.push_back(q);
    }
  }
  return out;
}

}  // namespace

std::vector<LidarPoint> accumulate_sweeps(const std::vector<LidarSweep>& sweeps, int max_sweeps) {
  return accumulate_impl<LidarSweep, LidarPoint>(sweeps, max_sweeps);
}

std::vector<RadarPoint> accumulate_sweeps(const std::vector<RadarSweep>& sweeps, int max_sweeps) {
  return accumulate_impl<RadarSweep, RadarPoint>(sweeps, max_sweeps);
}

std::vector<StackedPoint> stack_modalities(const std::vector<LidarPoint>& lidar,
                                           const std::vector<RadarPoint>& radar) {
  std::vector<StackedPoint> out;
  out.reserve(lidar.size() + radar.size());
  for (const LidarPoint& p : lidar) out.push_back(StackedPoint::from(p));
  for (const RadarPoint& p : radar) out.push_back(StackedPoint::from(p));
  return out;
}

}  // namespace lrf
