#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrf/pointcloud.hpp"

namespace lrf {

enum class Weather { kClear, kRain };

std::string to_string(Weather w);
Weather weather_from_string(const std::string& s);

/// Axis-aligned BEV ground-truth box at the key frame.
struct GtBox {
  double x = 0, y = 0;    // center, meters
  double vx = 0, vy = 0;  // m/s
  double wx = 2.0, wy = 4.5;  // footprint extents, meters

  double range() const;
};

struct SceneConfig {
  int n_objects = 10;
  double radius_min = 4.0, radius_max = 30.0;  // placement annulus
  double speed_min = 3.0, speed_max = 9.0;
  Weather weather = Weather::kClear;
  std::uint64_t seed = 0;
  int lidar_sweeps = 10;
  int radar_sweeps = 6;
  double sweep_dt = 0.05;   // seconds between sweeps
  double ego_speed = 5.0;   // straight-line ego motion along +x, m/s

  void validate() const;
};

/// Sensor behavior knobs. Lidar points per object follow the solid-angle law
/// count ~ Binomial(n0, min(1, (r0/r)^2)); rain keeps lidar points beyond
/// rain_radius with probability rain_keep_prob and leaves radar untouched.
struct SensorModel {
  double lidar_n0 = 200.0;
  double lidar_r0 = 10.0;
  double lidar_sigma = 0.03;    // gaussian position noise, meters
  double lidar_bg_mu = 250.0;   // expected ground returns per sweep
  double rain_radius = 16.0;
  double rain_keep_prob = 0.3;
  double radar_mu = 3.0;        // expected radar returns per object per sweep
  double radar_sigma_z = 1.0;   // radar height noise, meters
  double radar_sigma_v = 0.4;   // radar velocity noise, m/s
  double clutter_mu = 20.0;     // expected clutter points per radar sweep

  void validate() const;
};

struct Scene {
  int id = 0;
  std::uint64_t seed = 0;
  Weather weather = Weather::kClear;
  std::vector<GtBox> gts;
  std::vector<LidarSweep> lidar_sweeps;
  std::vector<RadarSweep> radar_sweeps;
};

/// Deterministic scene synthesis: same (cfg, model) -> bit-identical scene.
/// Each randomness consumer (placement, lidar points, rain dropout, radar
/// points, clutter) draws from its own derived stream, so e.g. toggling rain
/// does not perturb the radar draws of a paired seed.
Scene generate_scene(const SceneConfig& cfg, const SensorModel& model);

}  // namespace lrf
