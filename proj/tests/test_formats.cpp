#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "lrf/commands.hpp"
#include "lrf/config.hpp"
#include "lrf/formats.hpp"
#include "lrf/rng.hpp"

using namespace lrf;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& tag) {
  return fs::temp_directory_path() / ("lrf_fmt_" + tag);
}

}  // namespace

TEST_SUITE("formats") {

TEST_CASE("LRPC1 round trip preserves f32 values and header fields") {
  Rng rng(4);
  std::vector<LidarPoint> lidar(57);
  for (auto& p : lidar)
    p = LidarPoint{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-3, 5), rng.uniform(),
                   rng.uniform(0, 0.5)};
  const fs::path lp = temp_file("lidar.lrpc");
  write_lrpc(lp, lidar);

  // header bytes: magic, modality 0, u32 count, record width 5
  std::string bytes = read_text_file(lp);
  REQUIRE(bytes.size() == 5 + 1 + 4 + 1 + 57 * 5 * 4);
  CHECK(bytes.substr(0, 5) == "LRPC1");
  CHECK(bytes[5] == 0);
  CHECK(static_cast<unsigned char>(bytes[6]) == 57);
  CHECK(bytes[10] == 5);

  std::vector<LidarPoint> back = read_lidar_lrpc(lp);
  REQUIRE(back.size() == lidar.size());
  for (std::size_t i = 0; i < lidar.size(); ++i) {
    CHECK(back[i].x == static_cast<double>(static_cast<float>(lidar[i].x)));
    CHECK(back[i].intensity == static_cast<double>(static_cast<float>(lidar[i].intensity)));
    CHECK(back[i].dt == static_cast<double>(static_cast<float>(lidar[i].dt)));
  }

  std::vector<RadarPoint> radar(9);
  for (auto& p : radar)
    p = RadarPoint{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-3, 5),
                   rng.uniform(0, 20), rng.uniform(-10, 10), rng.uniform(-10, 10),
                   rng.uniform(0, 0.3)};
  const fs::path rp = temp_file("radar.lrpc");
  write_lrpc(rp, radar);
  std::vector<RadarPoint> rback = read_radar_lrpc(rp);
  REQUIRE(rback.size() == radar.size());
  for (std::size_t i = 0; i < radar.size(); ++i) {
    CHECK(rback[i].rcs == static_cast<double>(static_cast<float>(radar[i].rcs)));
    CHECK(rback[i].vx == static_cast<double>(static_cast<float>(radar[i].vx)));
  }

  // reading with the wrong modality fails
  CHECK_THROWS_AS(read_radar_lrpc(lp), IoError);
  fs::remove(lp);
  fs::remove(rp);
}

TEST_CASE("checkpoint round trip is bit-exact; bad magic rejected") {
  Rng rng(5);
  Checkpoint ck;
  ck.meta_json = "{\"k\":1}";
  Tensor a({3, 4});
  for (std::int64_t i = 0; i < a.numel(); ++i) a[i] = rng.normal();
  ck.tensors.emplace("alpha", a);
  Tensor b({2});
  b[0] = -0.0;
  b[1] = 1e-300;
  ck.tensors.emplace("beta", b);

  const fs::path path = temp_file("ck.lrfk");
  write_checkpoint(path, ck);
  std::string bytes = read_text_file(path);
  CHECK(bytes.substr(0, 5) == "LRFK1");

  Checkpoint back = read_checkpoint(path);
  CHECK(back.meta_json == ck.meta_json);
  REQUIRE(back.tensors.size() == 2);
  const Tensor& a2 = back.tensors.at("alpha");
  REQUIRE(a2.shape() == a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(a2[i] == a[i]);
  CHECK(std::signbit(back.tensors.at("beta")[0]));

  // corrupt the magic
  bytes[0] = 'X';
  write_text_file(path, bytes);
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  fs::remove(path);
}

TEST_CASE("PGM bytes are exactly specified") {
  Tensor m({2, 3});
  m.at(0, 0) = 0.0;
  m.at(0, 1) = 0.5;
  m.at(0, 2) = 1.0;
  m.at(1, 0) = -0.2;  // clamps to 0
  m.at(1, 1) = 2.0;   // clamps to 255
  m.at(1, 2) = 0.25;
  const fs::path path = temp_file("map.pgm");
  write_pgm(path, m);
  const std::string bytes = read_text_file(path);
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.substr(0, header.size()) == header);
  const unsigned char* px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
  CHECK(px[0] == 0);
  CHECK(px[1] == 128);  // round(127.5) away from zero
  CHECK(px[2] == 255);
  CHECK(px[3] == 0);
  CHECK(px[4] == 255);
  CHECK(px[5] == 64);
  fs::remove(path);
}

TEST_CASE("CSV round trip") {
  Rng rng(6);
  Tensor m({4, 5});
  for (std::int64_t i = 0; i < m.numel(); ++i) m[i] = rng.normal();
  const fs::path path = temp_file("map.csv");
  write_csv(path, m);
  Tensor back = read_csv(path);
  REQUIRE(back.shape() == m.shape());
  for (std::int64_t i = 0; i < m.numel(); ++i) CHECK(back[i] == m[i]);  // %.17g round trips
  fs::remove(path);
}

TEST_CASE("config: defaults validate, round trip, unknown keys rejected") {
  RunConfig cfg;
  cfg.validate();
  Json j = cfg.to_json();
  RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.pipeline.c1 == 16);
  CHECK(back.grid.nx() == 128);
  CHECK(back.eval.range_bins.size() == 3);

  Json bad = j;
  bad["pipeline"]["learning_rate"] = 0.1;  // wrong key name
  try {
    RunConfig::from_json(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
  }

  Json bad2 = j;
  bad2["extra_section"] = Json::object();
  CHECK_THROWS_AS(RunConfig::from_json(bad2), ConfigError);

  Json bad3 = j;
  bad3["pipeline"]["mode"] = "BOGUS";
  CHECK_THROWS_AS(RunConfig::from_json(bad3), ConfigError);

  // partial configs inherit defaults
  RunConfig partial = RunConfig::from_json(Json::parse(R"({"pipeline": {"c1": 4}})"));
  CHECK(partial.pipeline.c1 == 4);
  CHECK(partial.pipeline.c2 == 8);
}

TEST_CASE("config file save/load and validation failures") {
  RunConfig cfg;
  cfg.pipeline.epochs = 2;
  const fs::path path = temp_file("config.json");
  cfg.save_file(path);
  RunConfig back = RunConfig::load_file(path);
  CHECK(back.pipeline.epochs == 2);
  fs::remove(path);

  RunConfig invalid;
  invalid.grid.dx = 0.7;  // extent not divisible
  CHECK_THROWS_AS(invalid.validate(), ConfigError);

  RunConfig badgate;
  badgate.pipeline.gate.kernel = 4;
  CHECK_THROWS_AS(badgate.validate(), ConfigError);
}

TEST_CASE("metrics record JSON is one flat object with stable keys") {
  RunConfig cfg;
  EpochRecord rec;
  rec.epoch = 3;
  rec.mean_loss = 0.5;
  rec.val_ap = 0.25;
  rec.val_ap_bins = {0.5, std::nullopt, 0.1};
  Json j = epoch_record_json("testrun", cfg, rec);
  CHECK(j["run_id"] == "testrun");
  CHECK(j["epoch"] == 3);
  CHECK(j["ap_bins"].size() == 3);
  CHECK(j["ap_bins"][1].is_null());
  CHECK(j["gate_lidar_mean"].is_null());
  const std::string line = j.dump();
  CHECK(line.find('\n') == std::string::npos);
}

}  // TEST_SUITE
