#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lrf/pointcloud.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

// On-disk formats. All multi-byte integers are little-endian; point records
// are 32-bit floats, checkpoint tensors 64-bit floats.
//
// LRPC1 point file: "LRPC1" | modality byte (0 lidar, 1 radar) | u32 count |
// u8 record width | count * width * f32. Lidar records are (x, y, z,
// intensity, dt), radar records (x, y, z, rcs, vx, vy, dt).
//
// LRFK1 checkpoint: "LRFK1" | u32 version | u32 meta_len | meta (JSON text) |
// u32 n_params | per param: u32 name_len | name | u32 rank | u32 dims[rank] |
// f64 data.

inline constexpr int kLidarRecordWidth = 5;
inline constexpr int kRadarRecordWidth = 7;

void write_lrpc(const std::filesystem::path& path, const std::vector<LidarPoint>& points);
void write_lrpc(const std::filesystem::path& path, const std::vector<RadarPoint>& points);
std::vector<LidarPoint> read_lidar_lrpc(const std::filesystem::path& path);
std::vector<RadarPoint> read_radar_lrpc(const std::filesystem::path& path);

struct Checkpoint {
  std::string meta_json;
  // Ordered by name; the writer sorts, so bytes are independent of insertion
  // order.
  std::map<std::string, Tensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255), pixel = round(255 * v) clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const Tensor& map);  // (H,W)

/// One CSV row per grid row, "%.17g" floats.
void write_csv(const std::filesystem::path& path, const Tensor& map);  // (H,W)
Tensor read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lrf
