#include "lrf/datagen.hpp"

#include <cmath>

#include "lrf/rng.hpp"

namespace lrf {

std::string to_string(Weather w) { return w == Weather::kClear ? "CLEAR" : "RAIN"; }

Weather weather_from_string(const std::string& s) {
  if (s == "CLEAR") return Weather::kClear;
  if (s == "RAIN") return Weather::kRain;
  throw ConfigError("unknown weather '" + s + "'");
}

double GtBox::range() const { return std::hypot(x, y); }

void SceneConfig::validate() const {
  if (n_objects < 0) throw ConfigError("scene: n_objects must be >= 0");
  if (!(radius_min >= 0.0 && radius_max > radius_min))
    throw ConfigError("scene: placement radius range must satisfy 0 <= min < max");
  if (!(speed_min >= 0.0 && speed_max >= speed_min))
    throw ConfigError("scene: speed range must satisfy 0 <= min <= max");
  if (lidar_sweeps < 1 || radar_sweeps < 1)
    throw ConfigError("scene: sweep counts must be >= 1");
  if (!(sweep_dt > 0.0)) throw ConfigError("scene: sweep_dt must be > 0");
  if (ego_speed < 0.0) throw ConfigError("scene: ego_speed must be >= 0");
}

void SensorModel::validate() const {
  if (!(lidar_n0 >= 0.0 && lidar_r0 > 0.0)) throw ConfigError("sensor: lidar density law needs n0 >= 0 and r0 > 0");
  if (lidar_sigma < 0.0 || radar_sigma_z < 0.0 || radar_sigma_v < 0.0)
    throw ConfigError("sensor: noise sigmas must be >= 0");
  if (!(rain_keep_prob >= 0.0 && rain_keep_prob <= 1.0))
    throw ConfigError("sensor: rain_keep_prob must lie in [0,1]");
  if (rain_radius < 0.0) throw ConfigError("sensor: rain_radius must be >= 0");
  if (radar_mu < 0.0 || clutter_mu < 0.0 || lidar_bg_mu < 0.0)
    throw ConfigError("sensor: point rates must be >= 0");
}

namespace {

struct SimObject {
  double x, y;        // center at t = 0
  double vx, vy;
  double wx, wy;      // footprint extents
  double height;
  double intensity;   // lidar base intensity
  double rcs;         // radar cross-section, shared by the object's returns
};

bool footprints_overlap(const SimObject& a, const SimObject& b, double gap) {
  return std::fabs(a.x - b.x) * 2.0 < a.wx + b.wx + 2.0 * gap &&
         std::fabs(a.y - b.y) * 2.0 < a.wy + b.wy + 2.0 * gap;
}

// Count of independent keep-decisions; always draws exactly n uniforms so the
// stream length does not depend on p.
int binomial_count(Rng& rng, int n, double p) {
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (rng.uniform() < p) ++k;
  return k;
}

std::vector<SimObject> place_objects(const SceneConfig& cfg, Rng& rng) {
  std::vector<SimObject> objects;
  objects.reserve(static_cast<std::size_t>(cfg.n_objects));
  for (int i = 0; i < cfg.n_objects; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      SimObject obj{};
      const double r = rng.uniform(cfg.radius_min, cfg.radius_max);
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      obj.x = r * std::cos(theta);
      obj.y = r * std::sin(theta);
      const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
      const double heading = rng.uniform(0.0, 2.0 * M_PI);
      obj.vx = speed * std::cos(heading);
      obj.vy = speed * std::sin(heading);
      obj.wx = rng.uniform(1.7, 2.1);
      obj.wy = rng.uniform(4.0, 5.0);
      obj.height = rng.uniform(1.3, 1.8);
      obj.intensity = rng.uniform(0.3, 0.9);
      obj.rcs = rng.normal(10.0, 2.0);

      bool clash = false;
      for (const SimObject& other : objects)
        if (footprints_overlap(obj, other, 0.5)) {
          clash = true;
          break;
        }
      if (!clash) {
        objects.push_back(obj);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw ConfigError("generate_scene: could not place object " + std::to_string(i) +
                        " without overlap after 1000 tries");
  }
  return objects;
}

}  // namespace

Scene generate_scene(const SceneConfig& cfg, const SensorModel& model) {
  cfg.validate();
  model.validate();

  Scene scene;
  scene.seed = cfg.seed;
  scene.weather = cfg.weather;

  Rng placement_rng(derive_seed(cfg.seed, hash64("placement")));
  const std::vector<SimObject> objects = place_objects(cfg, placement_rng);

  for (const SimObject& obj : objects)
    scene.gts.push_back(GtBox{obj.x, obj.y, obj.vx, obj.vy, obj.wx, obj.wy});

  const std::uint64_t lidar_base = derive_seed(cfg.seed, hash64("lidar"));
  const std::uint64_t bg_base = derive_seed(cfg.seed, hash64("lidar_bg"));
  const std::uint64_t rain_base = derive_seed(cfg.seed, hash64("rain"));
  const std::uint64_t radar_base = derive_seed(cfg.seed, hash64("radar"));
  const std::uint64_t clutter_base = derive_seed(cfg.seed, hash64("clutter"));

  // Lidar sweeps, newest first (k = 0 is the key frame).
  for (int k = 0; k < cfg.lidar_sweeps; ++k) {
    const double t = -static_cast<double>(k) * cfg.sweep_dt;
    const double ego_x = cfg.ego_speed * t;
    LidarSweep sweep;
    sweep.time_offset = static_cast<double>(k) * cfg.sweep_dt;
    sweep.pose = Pose2{ego_x, 0.0, 0.0};  // sweep frame -> key frame

    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      const SimObject& obj = objects[oi];
      const double cx = obj.x + obj.vx * t;
      const double cy = obj.y + obj.vy * t;
      const double range = std::hypot(cx - ego_x, cy);
      const double ratio = model.lidar_r0 / std::max(range, 1e-6);
      const double p = std::min(1.0, ratio * ratio);

      Rng rng(derive_seed(lidar_base, (static_cast<std::uint64_t>(k) << 32) | oi));
      Rng rain_rng(derive_seed(rain_base, (static_cast<std::uint64_t>(k) << 32) | oi));
      const int count = binomial_count(rng, static_cast<int>(model.lidar_n0), p);
      for (int n = 0; n < count; ++n) {
        LidarPoint pt;
        const double px = cx + rng.uniform(-0.5, 0.5) * obj.wx + rng.normal(0.0, model.lidar_sigma);
        const double py = cy + rng.uniform(-0.5, 0.5) * obj.wy + rng.normal(0.0, model.lidar_sigma);
        pt.z = rng.uniform(0.0, obj.height);
        pt.intensity = std::min(1.0, std::max(0.0, obj.intensity + rng.normal(0.0, 0.05)));
        pt.dt = sweep.time_offset;
        // Sweep-frame coordinates are relative to the ego pose at sweep time.
        pt.x = px - ego_x;
        pt.y = py;

        if (cfg.weather == Weather::kRain) {
          const double point_range = std::hypot(pt.x, pt.y);
          if (point_range > model.rain_radius && !rain_rng.bernoulli(model.rain_keep_prob))
            continue;
        }
        sweep.points.push_back(pt);
      }
    }

    // Diffuse ground returns; they obey the same rain dropout as any other
    // lidar return.
    Rng bg_rng(derive_seed(bg_base, static_cast<std::uint64_t>(k)));
    Rng bg_rain_rng(derive_seed(rain_base, 0xb6ULL << 40 | static_cast<std::uint64_t>(k)));
    const int bg_count = bg_rng.poisson(model.lidar_bg_mu);
    for (int n = 0; n < bg_count; ++n) {
      LidarPoint pt;
      const double r = cfg.radius_max * std::sqrt(bg_rng.uniform());
      const double theta = bg_rng.uniform(0.0, 2.0 * M_PI);
      pt.x = r * std::cos(theta);
      pt.y = r * std::sin(theta);
      pt.z = bg_rng.uniform(0.0, 0.3);
      pt.intensity = bg_rng.uniform(0.0, 0.3);
      pt.dt = sweep.time_offset;
      if (cfg.weather == Weather::kRain && r > model.rain_radius &&
          !bg_rain_rng.bernoulli(model.rain_keep_prob))
        continue;
      sweep.points.push_back(pt);
    }
    scene.lidar_sweeps.push_back(std::move(sweep));
  }

  // Radar sweeps, newest first.
  for (int k = 0; k < cfg.radar_sweeps; ++k) {
    const double t = -static_cast<double>(k) * cfg.sweep_dt;
    const double ego_x = cfg.ego_speed * t;
    RadarSweep sweep;
    sweep.time_offset = static_cast<double>(k) * cfg.sweep_dt;
    sweep.pose = Pose2{ego_x, 0.0, 0.0};

    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      const SimObject& obj = objects[oi];
      const double cx = obj.x + obj.vx * t;
      const double cy = obj.y + obj.vy * t;

      Rng rng(derive_seed(radar_base, (static_cast<std::uint64_t>(k) << 32) | oi));
      const int count = rng.poisson(model.radar_mu);
      for (int n = 0; n < count; ++n) {
        RadarPoint pt;
        pt.x = cx + rng.uniform(-0.5, 0.5) * obj.wx - ego_x;
        pt.y = cy + rng.uniform(-0.5, 0.5) * obj.wy;
        pt.z = rng.normal(0.9, model.radar_sigma_z);
        pt.rcs = obj.rcs;
        pt.vx = obj.vx + rng.normal(0.0, model.radar_sigma_v);
        pt.vy = obj.vy + rng.normal(0.0, model.radar_sigma_v);
        pt.dt = sweep.time_offset;
        sweep.points.push_back(pt);
      }
    }

    Rng crng(derive_seed(clutter_base, static_cast<std::uint64_t>(k)));
    const int clutter = crng.poisson(model.clutter_mu);
    for (int n = 0; n < clutter; ++n) {
      RadarPoint pt;
      // Area-uniform over the sensing disc.
      const double r = cfg.radius_max * std::sqrt(crng.uniform());
      const double theta = crng.uniform(0.0, 2.0 * M_PI);
      pt.x = r * std::cos(theta);
      pt.y = r * std::sin(theta);
      pt.z = crng.normal(0.9, model.radar_sigma_z);
      pt.rcs = crng.normal(9.0, 3.0);
      pt.vx = crng.normal(0.0, 4.0);
      pt.vy = crng.normal(0.0, 4.0);
      pt.dt = sweep.time_offset;
      sweep.points.push_back(pt);
    }
    scene.radar_sweeps.push_back(std::move(sweep));
  }

  return scene;
}

}  // namespace lrf
