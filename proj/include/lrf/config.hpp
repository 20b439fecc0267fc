#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrf/datagen.hpp"
#include "lrf/fusion.hpp"
#include "lrf/voxel.hpp"

namespace lrf {

using Json = nlohmann::ordered_json;

enum class DetectorMode { kLidarOnly, kEarlyOnly, kMiddleOnly, kFull };

std::string to_string(DetectorMode m);
DetectorMode detector_mode_from_string(const std::string& s);

inline bool mode_has_radar_stream(DetectorMode m) { return m != DetectorMode::kLidarOnly; }
inline bool mode_has_gate(DetectorMode m) {
  return m == DetectorMode::kMiddleOnly || m == DetectorMode::kFull;
}
/// Early fusion = radar points stacked into the lidar-stream cloud.
inline bool mode_has_early_fusion(DetectorMode m) {
  return m == DetectorMode::kEarlyOnly || m == DetectorMode::kFull;
}

struct PipelineSettings {
  DetectorMode mode = DetectorMode::kFull;
  GateConfig gate;
  std::int64_t c1 = 16;
  std::int64_t c2 = 8;
  std::int64_t head_channels = 16;
  double lr = 0.2;
  int epochs = 4;
  int batch_size = 1;
  std::uint64_t seed = 42;
  bool use_momentum = false;
  double momentum = 0.9;
  double lambda_vel = 0.1;
  int max_lidar_sweeps = 10;
  int max_radar_sweeps = 6;

  void validate() const;
};

struct EvalSettings {
  double score_threshold = 0.3;
  int peak_window = 5;
  double match_radius = 2.0;
  std::vector<RangeBin> range_bins = {{0.0, 12.0}, {12.0, 20.0}, {20.0, 32.0}};

  void validate() const;
};

struct DatagenSettings {
  int n_scenes = 200;

  void validate() const;
};

/// The one configuration document: every command consumes a RunConfig and
/// echoes the effective values into its output directory. Unknown JSON keys
/// are rejected.
struct RunConfig {
  PipelineSettings pipeline;
  VoxelGridSpec grid;
  EvalSettings eval;
  SceneConfig scene;
  SensorModel sensor;
  DatagenSettings datagen;

  void validate() const;

  Json to_json() const;
  static RunConfig from_json(const Json& j);
  static RunConfig load_file(const std::filesystem::path& path);
  void save_file(const std::filesystem::path& path) const;
};

}  // namespace lrf
