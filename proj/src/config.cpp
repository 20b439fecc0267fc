#include "lrf/config.hpp"

#include <fstream>
#include <set>

#include "lrf/errors.hpp"
#include "lrf/formats.hpp"

namespace lrf {

std::string to_string(DetectorMode m) {
  switch (m) {
    case DetectorMode::kLidarOnly: return "LO";
    case DetectorMode::kEarlyOnly: return "LR_EARLY_ONLY";
    case DetectorMode::kMiddleOnly: return "LR_MIDDLE_ONLY";
    case DetectorMode::kFull: return "LR_FULL";
  }
  throw ContractError("bad DetectorMode");
}

DetectorMode detector_mode_from_string(const std::string& s) {
  if (s == "LO") return DetectorMode::kLidarOnly;
  if (s == "LR_EARLY_ONLY") return DetectorMode::kEarlyOnly;
  if (s == "LR_MIDDLE_ONLY") return DetectorMode::kMiddleOnly;
  if (s == "LR_FULL") return DetectorMode::kFull;
  throw ConfigError("unknown mode '" + s + "' (expected LO, LR_EARLY_ONLY, LR_MIDDLE_ONLY, LR_FULL)");
}

void PipelineSettings::validate() const {
  gate.validate();
  if (c1 < 1 || c2 < 1 || head_channels < 1)
    throw ConfigError("pipeline: channel widths must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("pipeline: lr must be >= 0");
  if (epochs < 0) throw ConfigError("pipeline: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("pipeline: batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("pipeline: momentum must lie in [0,1)");
  if (lambda_vel < 0.0) throw ConfigError("pipeline: lambda_vel must be >= 0");
  if (max_lidar_sweeps < 1 || max_radar_sweeps < 1)
    throw ConfigError("pipeline: sweep caps must be >= 1");
}

void EvalSettings::validate() const {
  if (!(score_threshold > 0.0 && score_threshold < 1.0))
    throw ConfigError("eval: score_threshold must lie in (0,1)");
  if (peak_window < 1 || peak_window % 2 == 0)
    throw ConfigError("eval: peak_window must be odd and positive");
  if (!(match_radius > 0.0)) throw ConfigError("eval: match_radius must be > 0");
  for (const RangeBin& b : range_bins)
    if (!(b.hi > b.lo) || b.lo < 0.0) throw ConfigError("eval: malformed range bin");
}

void DatagenSettings::validate() const {
  if (n_scenes < 1) throw ConfigError("datagen: n_scenes must be >= 1");
}

void RunConfig::validate() const {
  pipeline.validate();
  grid.validate();
  eval.validate();
  scene.validate();
  sensor.validate();
  datagen.validate();
}

namespace {

void require_keys(const Json& j, const std::string& section, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (const auto& item : j.items()) {
    if (!known.count(item.key()))
      throw ConfigError("config: unknown key '" + section + "." + item.key() + "'");
  }
}

template <typename T>
void get_to(const Json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

Json RunConfig::to_json() const {
  Json j;
  j["pipeline"] = {
      {"mode", to_string(pipeline.mode)},
      {"gate_mode", to_string(pipeline.gate.mode)},
      {"gate_kernel", pipeline.gate.kernel},
      {"c1", pipeline.c1},
      {"c2", pipeline.c2},
      {"head_channels", pipeline.head_channels},
      {"lr", pipeline.lr},
      {"epochs", pipeline.epochs},
      {"batch_size", pipeline.batch_size},
      {"seed", pipeline.seed},
      {"use_momentum", pipeline.use_momentum},
      {"momentum", pipeline.momentum},
      {"lambda_vel", pipeline.lambda_vel},
      {"max_lidar_sweeps", pipeline.max_lidar_sweeps},
      {"max_radar_sweeps", pipeline.max_radar_sweeps},
  };
  j["grid"] = {
      {"x", {grid.x0, grid.x1}},
      {"y", {grid.y0, grid.y1}},
      {"z", {grid.z0, grid.z1}},
      {"voxel", {grid.dx, grid.dy, grid.dz}},
      {"max_lidar_per_voxel", grid.max_lidar_per_voxel},
      {"max_radar_per_voxel", grid.max_radar_per_voxel},
  };
  Json bins = Json::array();
  for (const RangeBin& b : eval.range_bins) bins.push_back(Json::array({b.lo, b.hi}));
  j["eval"] = {
      {"score_threshold", eval.score_threshold},
      {"peak_window", eval.peak_window},
      {"match_radius", eval.match_radius},
      {"range_bins", bins},
  };
  j["scene"] = {
      {"n_objects", scene.n_objects},
      {"radius_range", {scene.radius_min, scene.radius_max}},
      {"speed_range", {scene.speed_min, scene.speed_max}},
      {"weather", to_string(scene.weather)},
      {"seed", scene.seed},
      {"lidar_sweeps", scene.lidar_sweeps},
      {"radar_sweeps", scene.radar_sweeps},
      {"sweep_dt", scene.sweep_dt},
      {"ego_speed", scene.ego_speed},
  };
  j["sensor"] = {
      {"lidar_n0", sensor.lidar_n0},
      {"lidar_r0", sensor.lidar_r0},
      {"lidar_sigma", sensor.lidar_sigma},
      {"lidar_bg_mu", sensor.lidar_bg_mu},
      {"rain_radius", sensor.rain_radius},
      {"rain_keep_prob", sensor.rain_keep_prob},
      {"radar_mu", sensor.radar_mu},
      {"radar_sigma_z", sensor.radar_sigma_z},
      {"radar_sigma_v", sensor.radar_sigma_v},
      {"clutter_mu", sensor.clutter_mu},
  };
  j["datagen"] = {
      {"n_scenes", datagen.n_scenes},
  };
  return j;
}

RunConfig RunConfig::from_json(const Json& root) {
  require_keys(root, "", {"pipeline", "grid", "eval", "scene", "sensor", "datagen"});
  RunConfig cfg;

  if (root.contains("pipeline")) {
    const Json& j = root.at("pipeline");
    require_keys(j, "pipeline",
                 {"mode", "gate_mode", "gate_kernel", "c1", "c2", "head_channels", "lr", "epochs",
                  "batch_size", "seed", "use_momentum", "momentum", "lambda_vel",
                  "max_lidar_sweeps", "max_radar_sweeps"});
    if (j.contains("mode")) cfg.pipeline.mode = detector_mode_from_string(j.at("mode"));
    if (j.contains("gate_mode")) cfg.pipeline.gate.mode = gate_mode_from_string(j.at("gate_mode"));
    get_to(j, "gate_kernel", cfg.pipeline.gate.kernel);
    get_to(j, "c1", cfg.pipeline.c1);
    get_to(j, "c2", cfg.pipeline.c2);
    get_to(j, "head_channels", cfg.pipeline.head_channels);
    get_to(j, "lr", cfg.pipeline.lr);
    get_to(j, "epochs", cfg.pipeline.epochs);
    get_to(j, "batch_size", cfg.pipeline.batch_size);
    get_to(j, "seed", cfg.pipeline.seed);
    get_to(j, "use_momentum", cfg.pipeline.use_momentum);
    get_to(j, "momentum", cfg.pipeline.momentum);
    get_to(j, "lambda_vel", cfg.pipeline.lambda_vel);
    get_to(j, "max_lidar_sweeps", cfg.pipeline.max_lidar_sweeps);
    get_to(j, "max_radar_sweeps", cfg.pipeline.max_radar_sweeps);
  }

  if (root.contains("grid")) {
    const Json& j = root.at("grid");
    require_keys(j, "grid", {"x", "y", "z", "voxel", "max_lidar_per_voxel", "max_radar_per_voxel"});
    auto get_pair = [&](const char* key, double& lo, double& hi) {
      if (!j.contains(key)) return;
      const Json& a = j.at(key);
      if (!a.is_array() || a.size() != 2)
        throw ConfigError(std::string("config: grid.") + key + " must be [min, max]");
      lo = a[0].get<double>();
      hi = a[1].get<double>();
    };
    get_pair("x", cfg.grid.x0, cfg.grid.x1);
    get_pair("y", cfg.grid.y0, cfg.grid.y1);
    get_pair("z", cfg.grid.z0, cfg.grid.z1);
    if (j.contains("voxel")) {
      const Json& a = j.at("voxel");
      if (!a.is_array() || a.size() != 3)
        throw ConfigError("config: grid.voxel must be [dx, dy, dz]");
      cfg.grid.dx = a[0].get<double>();
      cfg.grid.dy = a[1].get<double>();
      cfg.grid.dz = a[2].get<double>();
    }
    get_to(j, "max_lidar_per_voxel", cfg.grid.max_lidar_per_voxel);
    get_to(j, "max_radar_per_voxel", cfg.grid.max_radar_per_voxel);
  }

  if (root.contains("eval")) {
    const Json& j = root.at("eval");
    require_keys(j, "eval", {"score_threshold", "peak_window", "match_radius", "range_bins"});
    get_to(j, "score_threshold", cfg.eval.score_threshold);
    get_to(j, "peak_window", cfg.eval.peak_window);
    get_to(j, "match_radius", cfg.eval.match_radius);
    if (j.contains("range_bins")) {
      cfg.eval.range_bins.clear();
      for (const Json& b : j.at("range_bins")) {
        if (!b.is_array() || b.size() != 2)
          throw ConfigError("config: eval.range_bins entries must be [lo, hi]");
        cfg.eval.range_bins.push_back(RangeBin{b[0].get<double>(), b[1].get<double>()});
      }
    }
  }

  if (root.contains("scene")) {
    const Json& j = root.at("scene");
    require_keys(j, "scene",
                 {"n_objects", "radius_range", "speed_range", "weather", "seed", "lidar_sweeps",
                  "radar_sweeps", "sweep_dt", "ego_speed"});
    get_to(j, "n_objects", cfg.scene.n_objects);
    if (j.contains("radius_range")) {
      const Json& a = j.at("radius_range");
      if (!a.is_array() || a.size() != 2)
        throw ConfigError("config: scene.radius_range must be [min, max]");
      cfg.scene.radius_min = a[0].get<double>();
      cfg.scene.radius_max = a[1].get<double>();
    }
    if (j.contains("speed_range")) {
      const Json& a = j.at("speed_range");
      if (!a.is_array() || a.size() != 2)
        throw ConfigError("config: scene.speed_range must be [min, max]");
      cfg.scene.speed_min = a[0].get<double>();
      cfg.scene.speed_max = a[1].get<double>();
    }
    if (j.contains("weather")) cfg.scene.weather = weather_from_string(j.at("weather"));
    get_to(j, "seed", cfg.scene.seed);
    get_to(j, "lidar_sweeps", cfg.scene.lidar_sweeps);
    get_to(j, "radar_sweeps", cfg.scene.radar_sweeps);
    get_to(j, "sweep_dt", cfg.scene.sweep_dt);
    get_to(j, "ego_speed", cfg.scene.ego_speed);
  }

  if (root.contains("sensor")) {
    const Json& j = root.at("sensor");
    require_keys(j, "sensor",
                 {"lidar_n0", "lidar_r0", "lidar_sigma", "lidar_bg_mu", "rain_radius",
                  "rain_keep_prob", "radar_mu", "radar_sigma_z", "radar_sigma_v", "clutter_mu"});
    get_to(j, "lidar_n0", cfg.sensor.lidar_n0);
    get_to(j, "lidar_r0", cfg.sensor.lidar_r0);
    get_to(j, "lidar_sigma", cfg.sensor.lidar_sigma);
    get_to(j, "lidar_bg_mu", cfg.sensor.lidar_bg_mu);
    get_to(j, "rain_radius", cfg.sensor.rain_radius);
    get_to(j, "rain_keep_prob", cfg.sensor.rain_keep_prob);
    get_to(j, "radar_mu", cfg.sensor.radar_mu);
    get_to(j, "radar_sigma_z", cfg.sensor.radar_sigma_z);
    get_to(j, "radar_sigma_v", cfg.sensor.radar_sigma_v);
    get_to(j, "clutter_mu", cfg.sensor.clutter_mu);
  }

  if (root.contains("datagen")) {
    const Json& j = root.at("datagen");
    require_keys(j, "datagen", {"n_scenes"});
    get_to(j, "n_scenes", cfg.datagen.n_scenes);
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: cannot parse " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::save_file(const std::filesystem::path& path) const {
  write_text_file(path, to_json().dump(2) + "\n");
}

}  // namespace lrf
