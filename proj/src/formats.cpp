#include "lrf/formats.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lrf/errors.hpp"

namespace lrf {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  put_u32(out, bits);
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  put_u32(out, static_cast<std::uint32_t>(bits & 0xffffffffULL));
  put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

class Reader {
 public:
  Reader(std::string data, std::string origin) : data_(std::move(data)), origin_(std::move(origin)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return std::bit_cast<double>(lo | (hi << 32));
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw IoError("truncated file: " + origin_);
  }
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void spill(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to " + path.string());
}

constexpr char kPointMagic[] = "LRPC1";
constexpr char kCheckpointMagic[] = "LRFK1";

}  // namespace

void write_lrpc(const std::filesystem::path& path, const std::vector<LidarPoint>& points) {
  std::string out;
  out.append(kPointMagic, 5);
  out.push_back(0);
  put_u32(out, static_cast<std::uint32_t>(points.size()));
  out.push_back(static_cast<char>(kLidarRecordWidth));
  for (const LidarPoint& p : points) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
    put_f32(out, static_cast<float>(p.intensity));
    put_f32(out, static_cast<float>(p.dt));
  }
  spill(path, out);
}

void write_lrpc(const std::filesystem::path& path, const std::vector<RadarPoint>& points) {
  std::string out;
  out.append(kPointMagic, 5);
  out.push_back(1);
  put_u32(out, static_cast<std::uint32_t>(points.size()));
  out.push_back(static_cast<char>(kRadarRecordWidth));
  for (const RadarPoint& p : points) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
    put_f32(out, static_cast<float>(p.rcs));
    put_f32(out, static_cast<float>(p.vx));
    put_f32(out, static_cast<float>(p.vy));
    put_f32(out, static_cast<float>(p.dt));
  }
  spill(path, out);
}

namespace {

Reader open_lrpc(const std::filesystem::path& path, int want_modality) {
  Reader r(slurp(path), path.string());
  if (r.bytes(5) != kPointMagic) throw IoError("bad point-file magic in " + path.string());
  const int modality = r.u8();
  if (modality != want_modality)
    throw IoError("unexpected modality byte " + std::to_string(modality) + " in " + path.string());
  return r;
}

}  // namespace

std::vector<LidarPoint> read_lidar_lrpc(const std::filesystem::path& path) {
  Reader r = open_lrpc(path, 0);
  const std::uint32_t count = r.u32();
  const int width = r.u8();
  if (width != kLidarRecordWidth)
    throw IoError("unexpected lidar record width " + std::to_string(width) + " in " + path.string());
  std::vector<LidarPoint> points(count);
  for (auto& p : points) {
    p.x = r.f32();
    p.y = r.f32();
    p.z = r.f32();
    p.intensity = r.f32();
    p.dt = r.f32();
  }
  if (!r.at_end()) throw IoError("trailing bytes in " + path.string());
  return points;
}

std::vector<RadarPoint> read_radar_lrpc(const std::filesystem::path& path) {
  Reader r = open_lrpc(path, 1);
  const std::uint32_t count = r.u32();
  const int width = r.u8();
  if (width != kRadarRecordWidth)
    throw IoError("unexpected radar record width " + std::to_string(width) + " in " + path.string());
  std::vector<RadarPoint> points(count);
  for (auto& p : points) {
    p.x = r.f32();
    p.y = r.f32();
    p.z = r.f32();
    p.rcs = r.f32();
    p.vx = r.f32();
    p.vy = r.f32();
    p.dt = r.f32();
  }
  if (!r.at_end()) throw IoError("trailing bytes in " + path.string());
  return points;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string out;
  out.append(kCheckpointMagic, 5);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(ckpt.meta_json.size()));
  out += ckpt.meta_json;
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::int64_t d : tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (std::int64_t i = 0; i < tensor.numel(); ++i) put_f64(out, tensor[i]);
  }
  spill(path, out);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  Reader r(slurp(path), path.string());
  if (r.bytes(5) != kCheckpointMagic) throw IoError("bad checkpoint magic in " + path.string());
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + " in " +
                  path.string());
  Checkpoint ckpt;
  ckpt.meta_json = r.bytes(r.u32());
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    std::vector<std::int64_t> shape(rank);
    for (auto& d : shape) d = r.u32();
    Tensor t(shape);
    for (std::int64_t j = 0; j < t.numel(); ++j) t[j] = r.f64();
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  if (!r.at_end()) throw IoError("trailing bytes in " + path.string());
  return ckpt;
}

void write_pgm(const std::filesystem::path& path, const Tensor& map) {
  if (map.rank() != 2) throw DimError("write_pgm: expected (H,W), got " + map.shape_str());
  const std::int64_t H = map.extent(0), W = map.extent(1);
  std::string out = "P5\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  for (std::int64_t i = 0; i < H * W; ++i) {
    double v = std::round(255.0 * map[i]);
    v = std::min(255.0, std::max(0.0, v));
    out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  spill(path, out);
}

void write_csv(const std::filesystem::path& path, const Tensor& map) {
  if (map.rank() != 2) throw DimError("write_csv: expected (H,W), got " + map.shape_str());
  const std::int64_t H = map.extent(0), W = map.extent(1);
  std::string out;
  char buf[64];
  for (std::int64_t h = 0; h < H; ++h) {
    for (std::int64_t w = 0; w < W; ++w) {
      std::snprintf(buf, sizeof buf, "%.17g", map.at(h, w));
      if (w) out.push_back(',');
      out += buf;
    }
    out.push_back('\n');
  }
  spill(path, out);
}

Tensor read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::int64_t rows = 0, cols = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::int64_t c = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    if (cols < 0) cols = c;
    if (c != cols) throw IoError("ragged CSV in " + path.string());
    ++rows;
  }
  if (rows == 0) throw IoError("empty CSV " + path.string());
  return Tensor({rows, cols}, std::move(values));
}

std::string read_text_file(const std::filesystem::path& path) { return slurp(path); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  spill(path, text);
}

}  // namespace lrf
