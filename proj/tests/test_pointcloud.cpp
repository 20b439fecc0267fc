#include <cmath>

#include <doctest.h>

#include "lrf/pointcloud.hpp"
#include "lrf/rng.hpp"

using namespace lrf;

TEST_SUITE("pointcloud") {

TEST_CASE("stacking pads with exact zeros and round-trips") {
  LidarPoint lp{1.0, 2.0, 3.0, 0.5, 0.1};
  StackedPoint sl = StackedPoint::from(lp);
  CHECK(sl.tag == Modality::kLidar);
  const double expect_l[9] = {1, 2, 3, 0.5, 0.1, 0, 0, 0, 0};
  for (int i = 0; i < 9; ++i) CHECK(sl.f[i] == expect_l[i]);

  RadarPoint rp{4.0, 5.0, 0.2, 10.0, 2.0, -1.0, 0.05};
  StackedPoint sr = StackedPoint::from(rp);
  const double expect_r[9] = {4, 5, 0.2, 0, 0, 10, 2, -1, 0.05};
  for (int i = 0; i < 9; ++i) CHECK(sr.f[i] == expect_r[i]);

  LidarPoint lback = sl.to_lidar();
  CHECK(lback.x == lp.x);
  CHECK(lback.intensity == lp.intensity);
  CHECK(lback.dt == lp.dt);
  RadarPoint rback = sr.to_radar();
  CHECK(rback.rcs == rp.rcs);
  CHECK(rback.vx == rp.vx);
  CHECK(rback.vy == rp.vy);
  CHECK(rback.dt == rp.dt);

  CHECK_THROWS_AS(sl.to_radar(), ContractError);
}

TEST_CASE("stacking preserves counts and padding for random batches") {
  Rng rng(7);
  std::vector<LidarPoint> lidar(100);
  std::vector<RadarPoint> radar(7);
  for (auto& p : lidar)
    p = LidarPoint{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-2, 2), rng.uniform(),
                   rng.uniform(0, 0.5)};
  for (auto& p : radar)
    p = RadarPoint{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-2, 2),
                   rng.uniform(0, 20), rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(0, 0.3)};

  std::vector<StackedPoint> stacked = stack_modalities(lidar, radar);
  REQUIRE(stacked.size() == 107);
  for (const StackedPoint& p : stacked) {
    if (p.tag == Modality::kLidar) {
      CHECK(p.f[StackedPoint::kRcs] == 0.0);
      CHECK(p.f[StackedPoint::kVx] == 0.0);
      CHECK(p.f[StackedPoint::kVy] == 0.0);
      CHECK(p.f[StackedPoint::kDtRadar] == 0.0);
    } else {
      CHECK(p.f[StackedPoint::kIntensity] == 0.0);
      CHECK(p.f[StackedPoint::kDtLidar] == 0.0);
    }
  }
  // round trip each point bit-exactly
  for (std::size_t i = 0; i < lidar.size(); ++i) {
    LidarPoint q = stacked[i].to_lidar();
    CHECK(q.x == lidar[i].x);
    CHECK(q.y == lidar[i].y);
    CHECK(q.z == lidar[i].z);
    CHECK(q.intensity == lidar[i].intensity);
    CHECK(q.dt == lidar[i].dt);
  }
}

TEST_CASE("single key-frame sweep passes through with dt stamped to 0") {
  LidarSweep key;
  key.time_offset = 0.0;
  key.points = {LidarPoint{1, 2, 3, 0.5, 0.77}, LidarPoint{-4, 0, 1, 0.2, 0.3}};
  std::vector<LidarPoint> out = accumulate_sweeps(std::vector<LidarSweep>{key}, 10);
  REQUIRE(out.size() == 2);
  CHECK(out[0].x == 1.0);
  CHECK(out[0].y == 2.0);
  CHECK(out[0].z == 3.0);
  CHECK(out[0].dt == 0.0);  // stamped from the sweep, not the point
  CHECK(out[1].x == -4.0);
}

TEST_CASE("pure translation and yaw rotation of sweeps") {
  LidarSweep key;
  LidarSweep moved;
  moved.pose = Pose2{1.0, 0.0, 0.0};
  moved.time_offset = 0.05;
  moved.points = {LidarPoint{0, 0, 0, 1.0, 0}};
  std::vector<LidarPoint> out = accumulate_sweeps({key, moved}, 10);
  REQUIRE(out.size() == 1);
  CHECK(out[0].x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[0].y == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(out[0].dt == 0.05);

  RadarSweep rkey;
  RadarSweep rot;
  rot.pose = Pose2{0.0, 0.0, M_PI / 2.0};
  rot.time_offset = 0.1;
  rot.points = {RadarPoint{1, 0, 0, 5.0, 1.0, 0.0, 0}};
  std::vector<RadarPoint> rout = accumulate_sweeps({rkey, rot}, 10);
  REQUIRE(rout.size() == 1);
  CHECK(std::fabs(rout[0].x - 0.0) < 1e-12);
  CHECK(std::fabs(rout[0].y - 1.0) < 1e-12);
  CHECK(rout[0].z == 0.0);
  CHECK(std::fabs(rout[0].vx - 0.0) < 1e-12);
  CHECK(std::fabs(rout[0].vy - 1.0) < 1e-12);
}

TEST_CASE("identity poses: order-preserving concatenation plus dt stamping") {
  Rng rng(13);
  std::vector<LidarSweep> sweeps(3);
  for (std::size_t k = 0; k < sweeps.size(); ++k) {
    sweeps[k].time_offset = 0.05 * static_cast<double>(k);
    for (int i = 0; i < 5; ++i)
      sweeps[k].points.push_back(
          LidarPoint{rng.uniform(-10, 10), rng.uniform(-10, 10), 0.0, rng.uniform(), 123.0});
  }
  std::vector<LidarPoint> out = accumulate_sweeps(sweeps, 10);
  REQUIRE(out.size() == 15);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sweeps.size(); ++k)
    for (int i = 0; i < 5; ++i, ++pos) {
      CHECK(out[pos].x == sweeps[k].points[static_cast<std::size_t>(i)].x);
      CHECK(out[pos].dt == sweeps[k].time_offset);
    }
}

TEST_CASE("max_sweeps keeps the newest sweeps") {
  std::vector<LidarSweep> sweeps(5);
  for (std::size_t k = 0; k < 5; ++k) {
    sweeps[k].time_offset = 0.05 * static_cast<double>(k);
    sweeps[k].points = {LidarPoint{static_cast<double>(k), 0, 0, 0, 0}};
  }
  std::vector<LidarPoint> out = accumulate_sweeps(sweeps, 2);
  REQUIRE(out.size() == 2);
  CHECK(out[0].x == 0.0);
  CHECK(out[1].x == 1.0);
}

TEST_CASE("empty sweep list is an input error") {
  CHECK_THROWS_AS(accumulate_sweeps(std::vector<LidarSweep>{}, 5), InputError);
  CHECK_THROWS_AS(accumulate_sweeps(std::vector<RadarSweep>{}, 5), InputError);
}

}  // TEST_SUITE
