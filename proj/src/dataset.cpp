#include "lrf/dataset.hpp"

#include <cstdio>

#include "lrf/errors.hpp"
#include "lrf/formats.hpp"

namespace lrf {

std::vector<std::size_t> Dataset::split_indices(const std::string& split) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    if (splits[i] == split) idx.push_back(i);
  return idx;
}

std::string split_of_index(int index, int total) {
  const int train = (4 * total + 4) / 5;  // ceil(0.8 * total)
  return index < train ? "train" : "val";
}

namespace {

std::string scene_dir_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d", id);
  return buf;
}

std::string sweep_file_name(const char* modality, int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02d.lrpc", modality, k);
  return buf;
}

Json pose_json(const Pose2& p, double time_offset, const std::string& file) {
  return Json{{"file", file}, {"tx", p.tx}, {"ty", p.ty}, {"yaw", p.yaw},
              {"time_offset", time_offset}};
}

}  // namespace

void generate_dataset(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  cfg.validate();
  const int n = cfg.datagen.n_scenes;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + out_dir.string());

  std::vector<Scene> scenes(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1) if (jobs > 1)
  for (int i = 0; i < n; ++i) {
    SceneConfig sc = cfg.scene;
    sc.seed = cfg.scene.seed + static_cast<std::uint64_t>(i);
    Scene scene = generate_scene(sc, cfg.sensor);
    scene.id = i;
    scenes[static_cast<std::size_t>(i)] = std::move(scene);
  }

  Json manifest;
  manifest["format"] = "lrf-dataset-v1";
  manifest["n_scenes"] = n;
  manifest["base_seed"] = cfg.scene.seed;
  manifest["config"] = cfg.to_json();
  Json jscenes = Json::array();

  for (const Scene& scene : scenes) {
    const std::string dir = scene_dir_name(scene.id);
    std::filesystem::create_directories(out_dir / dir, ec);
    if (ec) throw IoError("cannot create scene directory " + (out_dir / dir).string());

    Json js;
    js["id"] = scene.id;
    js["seed"] = scene.seed;
    js["split"] = split_of_index(scene.id, n);
    js["weather"] = to_string(scene.weather);

    Json gts = Json::array();
    for (const GtBox& gt : scene.gts)
      gts.push_back(Json{{"x", gt.x}, {"y", gt.y}, {"vx", gt.vx}, {"vy", gt.vy},
                         {"wx", gt.wx}, {"wy", gt.wy}});
    js["gts"] = std::move(gts);

    Json lidar = Json::array();
    for (std::size_t k = 0; k < scene.lidar_sweeps.size(); ++k) {
      const LidarSweep& sw = scene.lidar_sweeps[k];
      const std::string file = dir + "/" + sweep_file_name("lidar", static_cast<int>(k));
      write_lrpc(out_dir / file, sw.points);
      lidar.push_back(pose_json(sw.pose, sw.time_offset, file));
    }
    js["lidar_sweeps"] = std::move(lidar);

    Json radar = Json::array();
    for (std::size_t k = 0; k < scene.radar_sweeps.size(); ++k) {
      const RadarSweep& sw = scene.radar_sweeps[k];
      const std::string file = dir + "/" + sweep_file_name("radar", static_cast<int>(k));
      write_lrpc(out_dir / file, sw.points);
      radar.push_back(pose_json(sw.pose, sw.time_offset, file));
    }
    js["radar_sweeps"] = std::move(radar);

    jscenes.push_back(std::move(js));
  }
  manifest["scenes"] = std::move(jscenes);
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Json manifest;
  try {
    manifest = Json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse manifest in " + dir.string() + ": " + e.what());
  }
  if (!manifest.contains("format") || manifest["format"] != "lrf-dataset-v1")
    throw IoError("not a dataset directory (bad manifest format): " + dir.string());

  Dataset ds;
  for (const Json& js : manifest.at("scenes")) {
    Scene scene;
    scene.id = js.at("id").get<int>();
    scene.seed = js.at("seed").get<std::uint64_t>();
    scene.weather = weather_from_string(js.at("weather").get<std::string>());
    for (const Json& jg : js.at("gts")) {
      GtBox gt;
      gt.x = jg.at("x").get<double>();
      gt.y = jg.at("y").get<double>();
      gt.vx = jg.at("vx").get<double>();
      gt.vy = jg.at("vy").get<double>();
      gt.wx = jg.at("wx").get<double>();
      gt.wy = jg.at("wy").get<double>();
      scene.gts.push_back(gt);
    }
    for (const Json& jp : js.at("lidar_sweeps")) {
      LidarSweep sw;
      sw.pose = Pose2{jp.at("tx").get<double>(), jp.at("ty").get<double>(),
                      jp.at("yaw").get<double>()};
      sw.time_offset = jp.at("time_offset").get<double>();
      sw.points = read_lidar_lrpc(dir / jp.at("file").get<std::string>());
      scene.lidar_sweeps.push_back(std::move(sw));
    }
    for (const Json& jp : js.at("radar_sweeps")) {
      RadarSweep sw;
      sw.pose = Pose2{jp.at("tx").get<double>(), jp.at("ty").get<double>(),
                      jp.at("yaw").get<double>()};
      sw.time_offset = jp.at("time_offset").get<double>();
      sw.points = read_radar_lrpc(dir / jp.at("file").get<std::string>());
      scene.radar_sweeps.push_back(std::move(sw));
    }
    ds.scenes.push_back(std::move(scene));
    ds.splits.push_back(js.at("split").get<std::string>());
  }
  return ds;
}

}  // namespace lrf
