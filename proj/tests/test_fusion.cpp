#include <cmath>
#include <limits>

#include <doctest.h>

#include "lrf/fusion.hpp"
#include "support/oracles.hpp"

using namespace lrf;
using i64 = std::int64_t;

namespace {

Tensor rand_tensor(std::vector<i64> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

GatedFusionParams zero_params(i64 c1, i64 c2, const GateConfig& gc, double bias_value) {
  GatedFusionParams p = GatedFusionParams::init(c1, c2, gc, 0);
  p.lidar_weight.value.fill(0.0);
  p.radar_weight.value.fill(0.0);
  p.lidar_bias.value.fill(bias_value);
  p.radar_bias.value.fill(bias_value);
  return p;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("saturated gate passes concat(L,R) through") {
  Rng rng(1);
  GateConfig gc;
  GatedFusionParams params = zero_params(3, 2, gc, 20.0);
  Tensor L = rand_tensor({1, 3, 8, 8}, rng);
  Tensor R = rand_tensor({1, 2, 8, 8}, rng);
  Tape tape;
  GatedFuseResult out = gated_fuse(tape, tape.constant(L), tape.constant(R), params, gc);

  const Tensor& w = tape.val(out.lidar_weights);
  for (i64 i = 0; i < w.numel(); ++i) CHECK(std::fabs(w[i] - 1.0) < 1e-8);

  const Tensor& fused = tape.val(out.fused);
  REQUIRE(fused.shape() == std::vector<i64>{1, 5, 8, 8});
  for (i64 i = 0; i < L.numel(); ++i) CHECK(std::fabs(fused[i] - L[i]) < 1e-6);
  for (i64 i = 0; i < R.numel(); ++i) CHECK(std::fabs(fused[L.numel() + i] - R[i]) < 1e-6);
}

TEST_CASE("zero gate params give exactly 0.5 weights") {
  Rng rng(2);
  GateConfig gc;
  GatedFusionParams params = zero_params(3, 2, gc, 0.0);
  Tensor L = rand_tensor({2, 3, 6, 6}, rng);
  Tensor R = rand_tensor({2, 2, 6, 6}, rng);
  Tape tape;
  GatedFuseResult out = gated_fuse(tape, tape.constant(L), tape.constant(R), params, gc);
  const Tensor& wl = tape.val(out.lidar_weights);
  for (i64 i = 0; i < wl.numel(); ++i) CHECK(wl[i] == 0.5);
  const Tensor& fused = tape.val(out.fused);
  for (i64 b = 0; b < 2; ++b)
    for (i64 c = 0; c < 3; ++c)
      for (i64 h = 0; h < 6; ++h)
        for (i64 x = 0; x < 6; ++x)
          CHECK(fused.at(b, c, h, x) == doctest::Approx(0.5 * L.at(b, c, h, x)).epsilon(1e-15));
}

TEST_CASE("fused shape is B x (C1+C2) x H x W across random draws") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const i64 B = 1 + static_cast<i64>(rng.below(2));
    const i64 C1 = 1 + static_cast<i64>(rng.below(6));
    const i64 C2 = 1 + static_cast<i64>(rng.below(6));
    const i64 H = 2 + static_cast<i64>(rng.below(7));
    const i64 W = 2 + static_cast<i64>(rng.below(7));
    GateConfig gc;
    gc.mode = rng.below(2) ? GateMode::kChannelSpecific : GateMode::kChannelConstant;
    GatedFusionParams params = GatedFusionParams::init(C1, C2, gc, trial);
    Tape tape;
    GatedFuseResult out = gated_fuse(tape, tape.constant(rand_tensor({B, C1, H, W}, rng)),
                                     tape.constant(rand_tensor({B, C2, H, W}, rng)), params, gc);
    CHECK(tape.val(out.fused).shape() == std::vector<i64>{B, C1 + C2, H, W});
    CHECK(tape.val(out.lidar_weights).shape() == std::vector<i64>{B, C1, H, W});
    CHECK(tape.val(out.radar_weights).shape() == std::vector<i64>{B, C2, H, W});
  }
}

TEST_CASE("weights are strictly inside (0,1)") {
  Rng rng(4);
  GateConfig gc;
  GatedFusionParams params = GatedFusionParams::init(4, 3, gc, 9);
  Tape tape;
  GatedFuseResult out =
      gated_fuse(tape, tape.constant(rand_tensor({1, 4, 10, 10}, rng, -40.0, 40.0)),
                 tape.constant(rand_tensor({1, 3, 10, 10}, rng, -40.0, 40.0)), params, gc);
  for (ValueId wid : {out.lidar_weights, out.radar_weights}) {
    const Tensor& w = tape.val(wid);
    for (i64 i = 0; i < w.numel(); ++i) {
      CHECK(w[i] > 0.0);
      CHECK(w[i] < 1.0);
    }
  }
}

TEST_CASE("channel-constant mode has exactly zero cross-channel spread") {
  Rng rng(5);
  GateConfig gc;
  gc.mode = GateMode::kChannelConstant;
  GatedFusionParams params = GatedFusionParams::init(5, 3, gc, 11);
  Tape tape;
  GatedFuseResult out = gated_fuse(tape, tape.constant(rand_tensor({2, 5, 7, 7}, rng)),
                                   tape.constant(rand_tensor({2, 3, 7, 7}, rng)), params, gc);
  const Tensor& w = tape.val(out.lidar_weights);
  for (i64 b = 0; b < 2; ++b)
    for (i64 h = 0; h < 7; ++h)
      for (i64 x = 0; x < 7; ++x) {
        double lo = w.at(b, 0, h, x), hi = lo;
        for (i64 c = 1; c < 5; ++c) {
          lo = std::min(lo, w.at(b, c, h, x));
          hi = std::max(hi, w.at(b, c, h, x));
        }
        CHECK(hi - lo == 0.0);
      }
}

TEST_CASE("spatial mismatch raises a dimension error") {
  GateConfig gc;
  GatedFusionParams params = GatedFusionParams::init(2, 2, gc, 0);
  Tape tape;
  CHECK_THROWS_AS(gated_fuse(tape, tape.constant(Tensor({1, 2, 8, 8})),
                             tape.constant(Tensor({1, 2, 6, 8})), params, gc),
                  DimError);
}

TEST_CASE("gate gradients pass grad_check, inputs included") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed + 60);
    GateConfig gc;
    GatedFusionParams params = GatedFusionParams::init(3, 2, gc, seed);
    Param L("L", rand_tensor({1, 3, 5, 5}, rng));
    Param R("R", rand_tensor({1, 2, 5, 5}, rng));
    Tensor c = rand_tensor({1, 5, 5, 5}, rng);
    auto build = [&](Tape& t) {
      GatedFuseResult out = gated_fuse(t, t.leaf(L), t.leaf(R), params, gc);
      return t.sum_all(t.mul(out.fused, t.constant(c)));
    };
    std::vector<Param*> checked = {&params.lidar_weight, &params.lidar_bias, &params.radar_weight,
                                   &params.radar_bias, &L, &R};
    CHECK(grad_check(build, checked, 1e-5) < 1e-4);
  }
}

TEST_CASE("channel-constant gradients pass grad_check") {
  Rng rng(70);
  GateConfig gc;
  gc.mode = GateMode::kChannelConstant;
  GatedFusionParams params = GatedFusionParams::init(3, 2, gc, 8);
  Tensor L = rand_tensor({1, 3, 5, 5}, rng);
  Tensor R = rand_tensor({1, 2, 5, 5}, rng);
  Tensor c = rand_tensor({1, 5, 5, 5}, rng);
  auto build = [&](Tape& t) {
    GatedFuseResult out = gated_fuse(t, t.constant(L), t.constant(R), params, gc);
    return t.sum_all(t.mul(out.fused, t.constant(c)));
  };
  std::vector<Param*> checked = {&params.lidar_weight, &params.lidar_bias, &params.radar_weight,
                                 &params.radar_bias};
  CHECK(grad_check(build, checked, 1e-5) < 1e-4);
}

TEST_CASE("export_weight_map: uniform, constant-mode, and random mean checks") {
  Tensor uniform = Tensor::full({1, 4, 3, 3}, 0.5);
  Tensor m = export_weight_map(uniform);
  REQUIRE(m.shape() == std::vector<i64>{3, 3});
  for (i64 i = 0; i < m.numel(); ++i) CHECK(m[i] == 0.5);

  // constant mode: export equals the underlying single-channel map
  Rng rng(8);
  Tensor single = rand_tensor({1, 1, 4, 4}, rng, 0.0, 1.0);
  Tape tape;
  const Tensor& bcast = tape.val(tape.broadcast_channels(tape.constant(single), 6));
  Tensor mc = export_weight_map(bcast);
  for (i64 i = 0; i < 16; ++i) CHECK(mc[i] == doctest::Approx(single[i]).epsilon(1e-15));

  Tensor w = rand_tensor({1, 5, 6, 7}, rng, 0.0, 1.0);
  Tensor me = export_weight_map(w);
  for (i64 h = 0; h < 6; ++h)
    for (i64 x = 0; x < 7; ++x) {
      double acc = 0.0;
      for (i64 ch = 0; ch < 5; ++ch) acc += w.at(0, ch, h, x);
      CHECK(std::fabs(me.at(h, x) - acc / 5.0) <= 1e-12);
    }
}

TEST_CASE("gate_stats: uniform map, indicator construction, masked-mean oracle") {
  VoxelGridSpec g;
  g.x0 = g.y0 = -16.0;
  g.x1 = g.y1 = 16.0;
  g.dx = g.dy = 1.0;
  g.z0 = -1.0;
  g.z1 = 1.0;
  g.dz = 2.0;

  Tensor uniform = Tensor::full({1, 2, 32, 32}, 0.5);
  std::vector<RangeBin> bins = {{0.0, 8.0}, {8.0, 100.0}};
  WeightStats s = gate_stats(uniform, bins, g);
  REQUIRE(s.overall.has_value());
  CHECK(*s.overall == doctest::Approx(0.5).epsilon(1e-15));
  for (const auto& b : s.per_bin) {
    REQUIRE(b.has_value());
    CHECK(*b == doctest::Approx(0.5).epsilon(1e-15));
  }

  // indicator: 1 inside r<10, 0 outside; bins [0,10) and [10,inf)
  Tensor ind({1, 1, 32, 32});
  for (i64 h = 0; h < 32; ++h)
    for (i64 w = 0; w < 32; ++w) {
      const double r = std::hypot(g.cell_center_x(w), g.cell_center_y(h));
      ind.at(0, 0, h, w) = r < 10.0 ? 1.0 : 0.0;
    }
  std::vector<RangeBin> bins2 = {{0.0, 10.0}, {10.0, std::numeric_limits<double>::infinity()}};
  WeightStats s2 = gate_stats(ind, bins2, g);
  CHECK(*s2.per_bin[0] == 1.0);
  CHECK(*s2.per_bin[1] == 0.0);

  // empty bin reported absent
  std::vector<RangeBin> bins3 = {{500.0, 600.0}};
  WeightStats s3 = gate_stats(ind, bins3, g);
  CHECK_FALSE(s3.per_bin[0].has_value());

  // random map vs brute-force masked means
  Rng rng(9);
  Tensor w = rand_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
  WeightStats s4 = gate_stats(w, bins2, g);
  for (std::size_t b = 0; b < bins2.size(); ++b) {
    double acc = 0.0;
    i64 n = 0;
    for (i64 h = 0; h < 32; ++h)
      for (i64 x = 0; x < 32; ++x) {
        const double r = std::hypot(g.cell_center_x(x), g.cell_center_y(h));
        if (r >= bins2[b].lo && r < bins2[b].hi) {
          for (i64 ch = 0; ch < 3; ++ch) acc += w.at(0, ch, h, x);
          n += 3;
        }
      }
    CHECK(std::fabs(*s4.per_bin[b] - acc / static_cast<double>(n)) <= 1e-12);
  }
}

}  // TEST_SUITE
